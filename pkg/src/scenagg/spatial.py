"""Spectral clustering of network buses and consensus over daily partitions."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cluster import agglomerate, kmeans_arrays
from .core import Partition, ScenarioSet, partition_from_assignment
from .distance import EUCLIDEAN, DistanceSpec, pairwise
from .errors import (
    BadK,
    DisconnectedWeightless,
    EigenNoConvergence,
    EmptyInput,
    MissingFlows,
    PreconditionError,
    ZeroDegree,
)
from .network import Network

SIMILARITY_KINDS = ("topology", "admittance", "avg_power_flow", "timeseries")


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    values: np.ndarray
    kind: str
    nodes: tuple = ()

    def __post_init__(self):
        A = np.array(self.values, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("similarity matrix must be square")
        if np.any(A < 0):
            raise ValueError("similarities must be nonnegative")
        if np.abs(A - A.T).max(initial=0.0) > 1e-12:
            raise ValueError("similarity matrix must be symmetric")
        A = (A + A.T) / 2
        np.fill_diagonal(A, 0.0)
        A.setflags(write=False)
        object.__setattr__(self, "values", A)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class Laplacian:
    values: np.ndarray
    normalized: bool


def _line_set(network, lines):
    if lines == "existing":
        return network.existing
    if lines == "all":
        return list(network.lines)
    return [network.line(n) if isinstance(n, str) else n for n in lines]


def similarity(network: Network, flows=None, kind: str = "topology", lines="existing",
               profiles=None, spec: DistanceSpec = EUCLIDEAN, bandwidth=None,
               allow_isolated=False) -> SimilarityMatrix:
    """Bus similarity matrix.

    ``topology``: 1 per connecting line.  ``admittance``: summed line
    susceptance.  ``avg_power_flow``: ``(|P_ij| + |P_ji|) / 2`` with ``flows``
    mapping line name to a flow or a ``(P_ij, P_ji)`` pair.  ``timeseries``:
    Gaussian kernel ``exp(-d^2 / (2 b^2))`` of the distance between nodal
    ``profiles`` rows on connected bus pairs, ``b`` defaulting to the median
    connected-pair distance.  Parallel lines add up.
    """
    if kind not in SIMILARITY_KINDS:
        raise ValueError(f"unknown similarity {kind!r}")
    n = len(network.buses)
    A = np.zeros((n, n))
    chosen = _line_set(network, lines)
    if kind == "avg_power_flow" and flows is None:
        raise MissingFlows("average power flow similarity needs line flows")
    if kind == "timeseries":
        if profiles is None:
            raise MissingFlows("time-series similarity needs nodal profiles")
        P = np.asarray(profiles, dtype=float)
        if P.shape[0] != n:
            raise ValueError(f"expected {n} nodal profiles, got {P.shape[0]}")
        D = pairwise(P, spec)
    pairs = []
    for ln in chosen:
        i, j = network.bus_index(ln.from_bus), network.bus_index(ln.to_bus)
        if kind == "topology":
            v = 1.0
        elif kind == "admittance":
            v = ln.susceptance
        elif kind == "avg_power_flow":
            f = flows.get(ln.name, 0.0)
            pij, pji = (f, f) if np.isscalar(f) else f
            v = 0.5 * (abs(pij) + abs(pji))
        else:
            pairs.append((i, j))
            continue
        A[i, j] += v
        A[j, i] += v
    if kind == "timeseries":
        d = np.array([D[i, j] for i, j in pairs])
        b = bandwidth if bandwidth is not None else (float(np.median(d[d > 0])) if np.any(d > 0) else 1.0)
        for (i, j), dij in zip(pairs, d):
            v = math.exp(-dij * dij / (2 * b * b))
            A[i, j] += v
            A[j, i] += v
    if not allow_isolated:
        zero = np.flatnonzero(A.sum(axis=1) == 0)
        if zero.size:
            raise DisconnectedWeightless(f"buses without any similarity: {[network.buses[i] for i in zero]}")
    return SimilarityMatrix(A, kind, network.buses)


def laplacian(A, normalized: bool = False) -> Laplacian:
    """``D - A`` or the symmetric normalized ``I - D^-1/2 A D^-1/2``."""
    M = A.values if isinstance(A, SimilarityMatrix) else np.asarray(A, dtype=float)
    deg = M.sum(axis=1)
    if not normalized:
        return Laplacian(np.diag(deg) - M, False)
    if np.any(deg <= 0):
        raise ZeroDegree("normalized Laplacian needs strictly positive degrees")
    s = 1.0 / np.sqrt(deg)
    return Laplacian(np.eye(M.shape[0]) - s[:, None] * M * s[None, :], True)


def jacobi_eigh(S, tol=1e-14, max_sweeps=100):
    """Cyclic Jacobi eigen-decomposition of a symmetric matrix.

    Returns ``(eigenvalues, eigenvectors)`` sorted ascending; each
    eigenvector's largest-magnitude entry is made positive.
    """
    A = np.array(S, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    scale = max(np.linalg.norm(A), 1e-300)
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap, aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        raise EigenNoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    vals = np.diag(A).copy()
    order = np.argsort(vals, kind="stable")
    vals, V = vals[order], V[:, order]
    for j in range(n):
        i = int(np.argmax(np.abs(V[:, j])))
        if V[i, j] < 0:
            V[:, j] = -V[:, j]
    return vals, V


def spectral_embedding(A, k, normalized=True):
    L = laplacian(A, normalized)
    vals, vecs = jacobi_eigh(L.values)
    U = vecs[:, :k]
    if normalized:
        norms = np.linalg.norm(U, axis=1)
        U = U / np.where(norms > 0, norms, 1.0)[:, None]
    return vals, U


def spectral_partition(A, k: int, inner: str = "kmeans", seed=0, normalized: bool = True,
                       linkage: str = "average") -> Partition:
    """Four-step spectral clustering of graph nodes.

    Laplacian -> ``k`` eigenvectors of the smallest eigenvalues -> row ``i``
    is the feature vector of node ``i`` -> k-means or HAC on the rows.  With
    the normalized Laplacian the rows are scaled to unit length.
    """
    M = A.values if isinstance(A, SimilarityMatrix) else np.asarray(A, dtype=float)
    n = M.shape[0]
    if not (isinstance(k, (int, np.integer)) and 1 <= k <= n):
        raise BadK(f"k={k!r} must be in 1..{n}")
    vals, U = spectral_embedding(M, k, normalized)
    feats = ScenarioSet(U, None, ["eig"], k)
    if inner == "kmeans":
        assign, _, _ = kmeans_arrays(U, np.ones(n), k, seed=seed)
    elif inner == "hac":
        if linkage in ("ward", "centroid_link"):
            dendro = agglomerate(n, linkage, X=U)
        else:
            dendro = agglomerate(n, linkage, D=pairwise(U))
        assign = dendro.cut(k)
    else:
        raise ValueError(f"unknown inner clustering {inner!r}")
    return partition_from_assignment(assign, feats, meta={
        "method": "spectral", "inner": inner, "normalized": normalized,
        "eigenvalues": vals[:k].tolist(), "seed": seed})


def consensus_matrix(daily_partitions) -> np.ndarray:
    labels = [np.asarray(p.assignment if isinstance(p, Partition) else p) for p in daily_partitions]
    if not labels:
        raise EmptyInput("no daily partitions given")
    n = labels[0].size
    if any(a.size != n for a in labels):
        raise PreconditionError("daily partitions cover different node sets")
    M = np.zeros((n, n))
    for a in labels:  # fixed-order summation
        M += a[:, None] == a[None, :]
    return M / len(labels)


def consensus_partition(daily_partitions, k: int, linkage: str = "average") -> Partition:
    """HAC on ``1 - M`` where ``M[i, j]`` is the share of days nodes i, j co-cluster."""
    M = consensus_matrix(daily_partitions)
    n = M.shape[0]
    if not (isinstance(k, (int, np.integer)) and 1 <= k <= n):
        raise BadK(f"k={k!r} must be in 1..{n}")
    if linkage in ("ward", "centroid_link"):
        raise PreconditionError(f"{linkage} linkage needs Euclidean features, not a consensus matrix")
    D = 1.0 - M
    np.fill_diagonal(D, 0.0)
    dendro = agglomerate(n, linkage, D=D)
    feats = ScenarioSet(M, None, ["consensus"], n)
    return partition_from_assignment(dendro.cut(k), feats, meta={
        "method": "consensus", "linkage": linkage, "days": len(daily_partitions)})
