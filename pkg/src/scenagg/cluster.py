"""Partitional and hierarchical clustering of scenario sets.

All methods honour scenario weights and break ties toward the lowest index,
so identical inputs (and seed) always give identical partitions.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import Partition, ScenarioSet, partition_from_assignment
from .distance import EUCLIDEAN, DistanceSpec, pairwise
from .errors import BadK, EmptyCluster, MismatchedSource, PreconditionError

logger = logging.getLogger(__name__)

LINKAGES = ("ward", "minmax", "complete", "single", "average", "centroid_link")


def _check_k(k, n):
    if not (isinstance(k, (int, np.integer)) and 1 <= k <= n):
        raise BadK(f"k={k!r} must be an integer in 1..{n}")
    return int(k)


def _sqdist(X, C):
    # exact pairwise squared distances (no expansion trick, keeps zeros exact)
    diff = X[:, None, :] - C[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


# ---------------------------------------------------------------------------
# k-means
# ---------------------------------------------------------------------------

def kmeans_plus_plus(X, w, k, rng) -> np.ndarray:
    """Weighted D^2 seeding; returns indices of the initial centers."""
    n = X.shape[0]
    p = w / w.sum()
    chosen = [int(rng.choice(n, p=p))]
    d2 = _sqdist(X, X[chosen])[:, 0]
    for _ in range(1, k):
        score = w * d2
        score[chosen] = 0.0
        tot = score.sum()
        if tot > 0:
            nxt = int(rng.choice(n, p=score / tot))
        else:
            nxt = next(i for i in range(n) if i not in chosen)
        chosen.append(nxt)
        d2 = np.minimum(d2, _sqdist(X, X[nxt:nxt + 1])[:, 0])
    return np.array(chosen)


def _assign(X, centers, max_repairs):
    d2 = _sqdist(X, centers)
    assign = np.argmin(d2, axis=1)
    dist = d2[np.arange(X.shape[0]), assign]
    k = centers.shape[0]
    repairs = 0
    while True:
        counts = np.bincount(assign, minlength=k)
        empty = np.flatnonzero(counts == 0)
        if empty.size == 0:
            return assign, dist, repairs
        if repairs >= max_repairs:
            raise EmptyCluster(f"could not repair empty clusters after {repairs} attempts")
        movable = counts[assign] > 1
        cand = np.where(movable, dist, -1.0)
        p = int(np.argmax(cand))
        e = int(empty[0])
        centers[e] = X[p]
        assign[p] = e
        dist[p] = 0.0
        repairs += 1


def _weighted_means(X, w, assign, k, fallback):
    sums = np.zeros((k, X.shape[1]))
    np.add.at(sums, assign, w[:, None] * X)
    tot = np.bincount(assign, weights=w, minlength=k)
    out = fallback.copy()
    ok = tot > 0
    out[ok] = sums[ok] / tot[ok, None]
    return out


def kmeans_arrays(X, w, k, seed=0, max_iter=300, tol=1e-9):
    """Lloyd's algorithm with k-means++ seeding on raw arrays.

    Returns ``(assignment, centers, inertia_history)``.  The weighted inertia
    is checked to be nonincreasing at every iteration.
    """
    X = np.asarray(X, dtype=float)
    w = np.asarray(w, dtype=float)
    n = X.shape[0]
    k = _check_k(k, n)
    rng = np.random.default_rng(seed)
    centers = X[kmeans_plus_plus(X, w, k, rng)].copy()
    history = []
    scale = max(1.0, float((w * (X ** 2).sum(axis=1)).sum()))
    for _ in range(max_iter):
        assign, dist, _ = _assign(X, centers, k)
        inertia = float(w @ dist)
        if history and inertia > history[-1] + 1e-12 * scale:
            raise AssertionError(f"k-means inertia increased: {history[-1]} -> {inertia}")
        history.append(inertia)
        new = _weighted_means(X, w, assign, k, centers)
        shift = float(np.sqrt(((new - centers) ** 2).sum(axis=1)).max())
        centers = new
        if shift <= tol:
            break
    assign, dist, _ = _assign(X, centers, k)
    inertia = float(w @ dist)
    if history and inertia > history[-1] + 1e-12 * scale:
        raise AssertionError(f"k-means inertia increased: {history[-1]} -> {inertia}")
    history.append(inertia)
    centers = _weighted_means(X, w, assign, k, centers)
    return assign, centers, history


def kmeans(s: ScenarioSet, k: int, seed=0, max_iter=300, tol=1e-9) -> Partition:
    """Weighted k-means; representatives are weighted centroids."""
    assign, _, history = kmeans_arrays(s.profiles, s.weights, k, seed, max_iter, tol)
    return partition_from_assignment(
        assign, s, meta={"method": "kmeans", "seed": seed, "inertia_history": history}
    )


# ---------------------------------------------------------------------------
# k-medoids (PAM)
# ---------------------------------------------------------------------------

def pam(D, w, k, max_swaps=None):
    """PAM BUILD + SWAP on a precomputed distance matrix.

    Returns ``(medoids, cost_history)`` with medoids sorted ascending.
    """
    D = np.asarray(D, dtype=float)
    w = np.asarray(w, dtype=float)
    n = D.shape[0]
    k = _check_k(k, n)
    medoids = [int(np.argmin(w @ D))]
    nearest = D[:, medoids[0]].copy()
    for _ in range(1, k):
        gain = w @ np.maximum(nearest[:, None] - D, 0.0)
        gain[medoids] = -np.inf
        c = int(np.argmax(gain))
        medoids.append(c)
        nearest = np.minimum(nearest, D[:, c])
    cost = float(w @ nearest)
    history = [cost]
    max_swaps = 100 * k if max_swaps is None else max_swaps
    for _ in range(max_swaps):
        best = (cost, None, None)
        is_med = np.zeros(n, dtype=bool)
        is_med[medoids] = True
        for pos in range(k):
            others = [m for i, m in enumerate(medoids) if i != pos]
            base = D[:, others].min(axis=1) if others else np.full(n, np.inf)
            costs = w @ np.minimum(base[:, None], D)
            costs[is_med] = np.inf
            h = int(np.argmin(costs))
            if costs[h] < best[0]:
                best = (float(costs[h]), pos, h)
        if best[1] is None or best[0] >= cost - 1e-12 * max(1.0, abs(cost)):
            break
        medoids[best[1]] = best[2]
        cost = best[0]
        history.append(cost)
    return np.array(sorted(medoids)), history


def _medoid_assignment(D, medoids):
    assign = np.argmin(D[:, medoids], axis=1)
    assign[medoids] = np.arange(len(medoids))
    return assign


def kmedoids(s: ScenarioSet, k: int, spec: DistanceSpec = EUCLIDEAN, seed=0,
             D=None) -> Partition:
    """Partitioning around medoids with an arbitrary dissimilarity.

    PAM is deterministic; ``seed`` is recorded for provenance only.
    """
    D = pairwise(s.profiles, spec) if D is None else D
    medoids, history = pam(D, s.weights, k)
    assign = _medoid_assignment(D, medoids)
    return partition_from_assignment(
        assign, s, representatives=s.profiles[medoids], rep_kind="medoid",
        meta={"method": "kmedoids", "seed": seed, "medoids": medoids.tolist(),
              "cost_history": history, "distance": spec.to_dict()},
    )


# ---------------------------------------------------------------------------
# hierarchical agglomeration
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Dendrogram:
    """Merge history; cluster labels follow the usual convention where
    leaves are ``0..n-1`` and merge ``i`` creates label ``n + i``."""

    n: int
    merges: tuple  # (a, b, height, new_size)

    @property
    def heights(self) -> np.ndarray:
        return np.array([m[2] for m in self.merges])

    def cut(self, k: int) -> np.ndarray:
        """Assignment after ``n - k`` merges, labelled by smallest member id."""
        k = _check_k(k, self.n)
        parent = list(range(2 * self.n - 1))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for step, (a, b, _, _) in enumerate(self.merges[: self.n - k]):
            c = self.n + step
            parent[find(a)] = c
            parent[find(b)] = c
        roots = [find(i) for i in range(self.n)]
        labels = {}
        return np.array([labels.setdefault(r, len(labels)) for r in roots])


def _linkage_value(kind, A, B, D, X, w):
    if kind == "single":
        return D[np.ix_(A, B)].min()
    if kind == "complete":
        return D[np.ix_(A, B)].max()
    if kind == "average":
        return (w[A] @ D[np.ix_(A, B)] @ w[B]) / (w[A].sum() * w[B].sum())
    if kind == "minmax":
        U = np.concatenate([A, B])
        return D[np.ix_(U, U)].max(axis=1).min()
    wa, wb = w[A].sum(), w[B].sum()
    ca = (w[A] @ X[A]) / wa
    cb = (w[B] @ X[B]) / wb
    diff = ca - cb
    sq = float(diff @ diff)
    if kind == "ward":
        return wa * wb / (wa + wb) * sq
    return sq  # centroid_link


def agglomerate(n, linkage, D=None, X=None, w=None, adjacency=False) -> Dendrogram:
    """Naive agglomeration that evaluates the linkage formula directly on members.

    Linkage values between surviving clusters are cached and only the pairs
    involving a newly merged cluster are recomputed.  With ``adjacency`` only
    chronologically adjacent clusters (contiguous id blocks) may merge.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}; expected one of {LINKAGES}")
    w = np.ones(n) if w is None else np.asarray(w, dtype=float)
    if linkage in ("ward", "centroid_link") and X is None:
        raise PreconditionError(f"{linkage} linkage needs feature vectors")
    if linkage not in ("ward", "centroid_link") and D is None:
        raise PreconditionError(f"{linkage} linkage needs a distance matrix")
    size = 2 * n - 1
    L = np.full((size, size), np.inf)
    members = {i: np.array([i]) for i in range(n)}
    span = {i: (i, i) for i in range(n)}

    def value(a, b):
        if adjacency:
            (alo, ahi), (blo, bhi) = span[a], span[b]
            if ahi + 1 != blo and bhi + 1 != alo:
                return np.inf
        return _linkage_value(linkage, members[a], members[b], D, X, w)

    for a in range(n):
        for b in range(a + 1, n):
            if adjacency and b != a + 1:
                continue
            L[a, b] = value(a, b)
    merges = []
    active = set(range(n))
    for step in range(n - 1):
        flat = int(np.argmin(L))
        a, b = divmod(flat, size)
        h = L[a, b]
        if not np.isfinite(h):
            raise RuntimeError("no mergeable cluster pair left")
        c = n + step
        members[c] = np.concatenate([members[a], members[b]])
        span[c] = (min(span[a][0], span[b][0]), max(span[a][1], span[b][1]))
        merges.append((a, b, float(h), int(members[c].size)))
        active -= {a, b}
        L[a, :] = L[:, a] = np.inf
        L[b, :] = L[:, b] = np.inf
        for o in sorted(active):
            L[o, c] = value(o, c)
        active.add(c)
        del members[a], members[b]
    return Dendrogram(n, tuple(merges))


def _hac_inputs(s, linkage, spec):
    if linkage in ("ward", "centroid_link"):
        if not spec.is_euclidean:
            raise PreconditionError(f"{linkage} linkage requires Euclidean geometry")
        return None, s.profiles
    return pairwise(s.profiles, spec), None


def hac(s: ScenarioSet, k: int, linkage: str = "ward", spec: DistanceSpec = EUCLIDEAN):
    """Agglomerative clustering cut at ``k`` clusters; returns (Partition, Dendrogram)."""
    k = _check_k(k, s.n)
    D, X = _hac_inputs(s, linkage, spec)
    dendro = agglomerate(s.n, linkage, D=D, X=X, w=s.weights)
    p = partition_from_assignment(dendro.cut(k), s, meta={
        "method": "hac", "linkage": linkage, "distance": spec.to_dict()})
    return p, dendro


def ctpc(s: ScenarioSet, k: int, linkage: str = "ward", spec: DistanceSpec = EUCLIDEAN):
    """Chronological clustering: HAC where only time-adjacent clusters merge.

    Scenario id order is taken as the chronology, so every cluster is a
    contiguous block of ids.
    """
    k = _check_k(k, s.n)
    D, X = _hac_inputs(s, linkage, spec)
    dendro = agglomerate(s.n, linkage, D=D, X=X, w=s.weights, adjacency=True)
    p = partition_from_assignment(dendro.cut(k), s, meta={
        "method": "ctpc", "linkage": linkage, "distance": spec.to_dict()})
    return p, dendro


# ---------------------------------------------------------------------------
# representatives
# ---------------------------------------------------------------------------

def representative(p: Partition, source: ScenarioSet, kind: str = "centroid",
                   spec: DistanceSpec = EUCLIDEAN, D=None) -> Partition:
    """Recompute cluster representatives.

    ``centroid``: weighted mean.  ``medoid``: member minimizing the weighted
    sum of distances to the other members.  ``closest_to_centroid``: member
    nearest to the weighted mean.  Ties go to the lowest scenario id.
    """
    if p.assignment.size != source.n:
        raise MismatchedSource("partition does not cover the source set")
    X, w = source.profiles, source.weights
    if kind == "centroid":
        base = partition_from_assignment(p.assignment, source, relabel=False)
        return Partition(p.assignment, base.representatives, "centroid", base.cluster_weights,
                         source.fingerprint(), dict(p.meta, representation="centroid"))
    if kind not in ("medoid", "closest_to_centroid"):
        raise ValueError(f"unknown representation {kind!r}")
    reps = np.empty((p.k, X.shape[1]))
    chosen = []
    for c in range(p.k):
        mem = p.members(c)
        if kind == "medoid":
            sub = D[np.ix_(mem, mem)] if D is not None else pairwise(X[mem], spec)
            score = sub @ w[mem]
        else:
            tot = w[mem].sum()
            centroid = (w[mem] @ X[mem]) / tot if tot > 0 else X[mem].mean(axis=0)
            score = pairwise(X[mem], spec, centroid[None, :])[:, 0]
        j = int(mem[int(np.argmin(score))])
        chosen.append(j)
        reps[c] = X[j]
    cw = np.bincount(p.assignment, weights=w, minlength=p.k)
    rep_kind = "medoid" if kind == "medoid" else "selected"
    return Partition(p.assignment, reps, rep_kind, cw, source.fingerprint(),
                     dict(p.meta, representation=kind, representative_ids=chosen))
