"""Dissimilarity measures between scenario feature vectors.

Minkowski (time similarity), dynamic time warping and shape-based distance
(shape similarity) and minimum jump cost (structural similarity).  Only
Minkowski is a metric; the other three satisfy nonnegativity, symmetry and
``d(x, x) = 0`` but not the triangle inequality.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, InfeasibleWindow, LengthMismatch, ZeroNorm

KINDS = ("minkowski", "dtw", "mjc", "sbd")


@dataclass(frozen=True)
class DistanceSpec:
    kind: str = "minkowski"
    p: float = 2.0
    window: int | None = None
    phi: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distance {self.kind!r}; expected one of {KINDS}")
        if self.kind == "minkowski" and not self.p >= 1:
            raise ValueError("Minkowski order must be >= 1 (or inf)")
        if self.window is not None and self.window < 0:
            raise ValueError("DTW window must be nonnegative")
        if self.phi is not None and self.phi < 0:
            raise ValueError("MJC timing penalty must be nonnegative")

    @property
    def is_euclidean(self) -> bool:
        return self.kind == "minkowski" and self.p == 2

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "minkowski":
            d["p"] = "inf" if math.isinf(self.p) else self.p
        elif self.kind == "dtw":
            d["window"] = self.window
        elif self.kind == "mjc":
            d["phi"] = self.phi
        return d

    @classmethod
    def parse(cls, text) -> DistanceSpec:
        """Build from ``"euclidean"``, ``"minkowski:1"``, ``"dtw:3"``, ``"mjc"``, ``"sbd"``..."""
        if isinstance(text, DistanceSpec):
            return text
        if isinstance(text, dict):
            d = dict(text)
            if d.get("p") == "inf":
                d["p"] = math.inf
            return cls(**d)
        name, _, arg = str(text).partition(":")
        name = name.strip().lower()
        if name in ("euclidean", "l2"):
            return cls("minkowski", 2.0)
        if name in ("manhattan", "l1"):
            return cls("minkowski", 1.0)
        if name in ("chebyshev", "linf"):
            return cls("minkowski", math.inf)
        if name == "minkowski":
            return cls("minkowski", float(arg) if arg else 2.0)
        if name == "dtw":
            return cls("dtw", window=int(arg) if arg else None)
        if name == "mjc":
            return cls("mjc", phi=float(arg) if arg else None)
        return cls(name)


EUCLIDEAN = DistanceSpec()


def _vec(x) -> np.ndarray:
    return np.asarray(x, dtype=float).ravel()


def minkowski(x, y, p=2.0) -> float:
    x, y = _vec(x), _vec(y)
    if x.shape != y.shape:
        raise LengthMismatch(f"lengths {x.size} and {y.size} differ")
    if not p >= 1:
        raise ValueError("Minkowski order must be >= 1 (or inf)")
    diff = np.abs(x - y)
    if diff.size == 0:
        return 0.0
    if math.isinf(p):
        return float(diff.max())
    if p == 1:
        return float(diff.sum())
    if p == 2:
        return float(math.sqrt(np.dot(diff, diff)))
    return float((diff ** p).sum() ** (1.0 / p))


def dtw(x, y, window=None) -> float:
    """Dynamic time warping distance.

    Local cost is the squared difference; steps are diagonal, vertical and
    horizontal; ``window`` is an optional Sakoe-Chiba band ``|i - j| <= w``.
    Returns the square root of the optimal cumulative cost.
    """
    x, y = _vec(x).tolist(), _vec(y).tolist()
    n, m = len(x), len(y)
    if n == 0 or m == 0:
        raise EmptyInput("DTW needs nonempty series")
    if window is not None and window < abs(n - m):
        raise InfeasibleWindow(f"window {window} < length difference {abs(n - m)}")
    w = max(n, m) if window is None else int(window)
    inf = math.inf
    prev = [inf] * (m + 1)
    prev[0] = 0.0
    for i in range(1, n + 1):
        cur = [inf] * (m + 1)
        xi = x[i - 1]
        lo, hi = max(1, i - w), min(m, i + w)
        left = inf
        for j in range(lo, hi + 1):
            d = xi - y[j - 1]
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if left < best:
                best = left
            left = d * d + best
            cur[j] = left
        prev = cur
    return math.sqrt(prev[m])


def default_phi(x, y) -> float:
    """Timing penalty used when none is given: pooled population std of both series."""
    return float(np.concatenate([_vec(x), _vec(y)]).std())


def mjc_directed(x, y, phi) -> float:
    """Cumulative minimum jump cost walking along ``x`` and jumping into ``y``.

    For each ``x[i]`` the walker jumps to the cheapest ``y[k]`` with ``k`` at
    or after its current position ``j``; the jump costs
    ``(x[i] - y[k])**2 + (phi * (k - j))**2``.  The position then advances to
    ``k + 1`` (clamped to the last element).  Ties go to the smallest ``k``.
    """
    x, y = _vec(x), _vec(y)
    if x.size == 0 or y.size == 0:
        raise EmptyInput("MJC needs nonempty series")
    m = y.size
    j = 0
    total = 0.0
    steps = np.arange(m, dtype=float)
    for xi in x:
        cand = (xi - y[j:]) ** 2 + (phi * steps[: m - j]) ** 2
        k = int(np.argmin(cand))
        total += float(cand[k])
        j = min(j + k + 1, m - 1)
    return total


def mjc(x, y, phi=None) -> float:
    """Minimum jump cost, symmetrized as the smaller of the two directions."""
    if phi is None:
        phi = default_phi(x, y)
    if phi < 0:
        raise ValueError("phi must be nonnegative")
    return min(mjc_directed(x, y, phi), mjc_directed(y, x, phi))


def ncc(x, y) -> np.ndarray:
    """Coefficient-normalized cross-correlation over all shifts (zero padded)."""
    x, y = _vec(x), _vec(y)
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if not (nx > 0 and ny > 0):
        raise ZeroNorm("shape-based distance needs series with positive norm")
    return np.correlate(x, y, mode="full") / (nx * ny)


def sbd(x, y) -> float:
    """Shape-based distance ``1 - max NCC``, in ``[0, 2]``."""
    return float(min(2.0, max(0.0, 1.0 - ncc(x, y).max())))


def distance(x, y, spec: DistanceSpec = EUCLIDEAN) -> float:
    if spec.kind == "minkowski":
        return minkowski(x, y, spec.p)
    if spec.kind == "dtw":
        return dtw(x, y, spec.window)
    if spec.kind == "mjc":
        return mjc(x, y, spec.phi)
    return sbd(x, y)


def pairwise(X, spec: DistanceSpec = EUCLIDEAN, Y=None) -> np.ndarray:
    """Distance matrix between rows of ``X`` (and ``Y`` if given).

    The square case is symmetric with an exact zero diagonal.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    square = Y is None
    Y = X if square else np.atleast_2d(np.asarray(Y, dtype=float))
    if spec.kind == "minkowski":
        if X.shape[1] != Y.shape[1]:
            raise LengthMismatch("feature dimensions differ")
        out = np.empty((X.shape[0], Y.shape[0]))
        block = max(1, 2_000_000 // max(1, Y.size))
        for s in range(0, X.shape[0], block):
            diff = np.abs(X[s:s + block, None, :] - Y[None, :, :])
            if math.isinf(spec.p):
                out[s:s + block] = diff.max(axis=2) if diff.shape[2] else 0.0
            elif spec.p == 1:
                out[s:s + block] = diff.sum(axis=2)
            elif spec.p == 2:
                out[s:s + block] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
            else:
                out[s:s + block] = (diff ** spec.p).sum(axis=2) ** (1.0 / spec.p)
        if square:
            out = np.maximum(out, out.T)
            np.fill_diagonal(out, 0.0)
        return out
    n, m = X.shape[0], Y.shape[0]
    out = np.zeros((n, m))
    for i in range(n):
        for j in range(i + 1 if square else 0, m):
            out[i, j] = distance(X[i], Y[j], spec)
            if square:
                out[j, i] = out[i, j]
    return out
