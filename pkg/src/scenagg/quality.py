"""Partition quality scores and optimization-gap reporting."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .core import Partition, ScenarioSet
from .distance import EUCLIDEAN, DistanceSpec, pairwise
from .errors import MismatchedSource, NonPositiveBase, SingleCluster, SingletonOnly

METRICS = ("silhouette", "davies_bouldin", "calinski_harabasz")


def silhouette(X, labels, spec: DistanceSpec = EUCLIDEAN, D=None) -> float:
    """Mean silhouette; points in singleton clusters score 0."""
    labels = np.asarray(labels)
    ks, counts = np.unique(labels, return_counts=True)
    if ks.size < 2:
        raise SingleCluster("silhouette needs at least two clusters")
    if np.all(counts == 1):
        raise SingletonOnly("silhouette is undefined when every cluster is a singleton")
    D = pairwise(X, spec) if D is None else D
    n = labels.size
    s = np.zeros(n)
    size = dict(zip(ks.tolist(), counts.tolist()))
    for i in range(n):
        own = labels[i]
        if size[own] == 1:
            continue
        a = D[i, labels == own].sum() / (size[own] - 1)
        b = min(D[i, labels == other].mean() for other in ks if other != own)
        m = max(a, b)
        s[i] = 0.0 if m == 0 else (b - a) / m
    return float(s.mean())


def davies_bouldin(X, labels) -> float:
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    ks = np.unique(labels)
    if ks.size < 2:
        raise SingleCluster("Davies-Bouldin needs at least two clusters")
    C = np.array([X[labels == k].mean(axis=0) for k in ks])
    S = np.array([np.linalg.norm(X[labels == k] - C[i], axis=1).mean() for i, k in enumerate(ks)])
    M = pairwise(C)
    R = np.zeros((ks.size, ks.size))
    off = ~np.eye(ks.size, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        R[off] = ((S[:, None] + S[None, :])[off]) / M[off]
    R = np.nan_to_num(R, nan=0.0, posinf=0.0)
    return float(R.max(axis=1).mean())


def calinski_harabasz(X, labels) -> float:
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    ks = np.unique(labels)
    n, k = X.shape[0], ks.size
    if k < 2:
        raise SingleCluster("Calinski-Harabasz needs at least two clusters")
    mean = X.mean(axis=0)
    between = within = 0.0
    for c in ks:
        Xc = X[labels == c]
        cc = Xc.mean(axis=0)
        between += Xc.shape[0] * float((cc - mean) @ (cc - mean))
        within += float(((Xc - cc) ** 2).sum())
    if within == 0:
        return 1.0
    return float(between * (n - k) / (within * (k - 1)))


def explicit_metric(s: ScenarioSet, p: Partition, metric: str = "silhouette",
                    spec: DistanceSpec = EUCLIDEAN) -> float:
    if p.assignment.size != s.n:
        raise MismatchedSource("partition does not cover the scenario set")
    if metric == "silhouette":
        return silhouette(s.profiles, p.assignment, spec)
    if metric == "davies_bouldin":
        return davies_bouldin(s.profiles, p.assignment)
    if metric == "calinski_harabasz":
        return calinski_harabasz(s.profiles, p.assignment)
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


@dataclass(frozen=True)
class GapReport:
    full_objective: float
    reduced_objective: float
    oos_objective: float
    in_sample_relative: float
    oos_relative: float
    oos_gap_pct: float
    in_sample_gap_pct: float

    def to_dict(self):
        return asdict(self)


def gap_report(full_obj, reduced_obj, oos_obj) -> GapReport:
    full_obj, reduced_obj, oos_obj = float(full_obj), float(reduced_obj), float(oos_obj)
    if not full_obj > 0:
        raise NonPositiveBase("full-set objective must be positive")
    return GapReport(
        full_objective=full_obj,
        reduced_objective=reduced_obj,
        oos_objective=oos_obj,
        in_sample_relative=reduced_obj / full_obj,
        oos_relative=oos_obj / full_obj,
        oos_gap_pct=100.0 * (oos_obj - full_obj) / full_obj,
        in_sample_gap_pct=100.0 * (reduced_obj - full_obj) / full_obj,
    )
