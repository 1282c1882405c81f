"""Scenario data model shared by the aggregation and optimization modules.

A scenario is one day of hourly values for every uncertain channel (loads,
renewable capacity factors...).  Its feature vector is the channel-major
concatenation ``[ch0 h0..h23, ch1 h0..h23, ...]``.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    MismatchedSource,
    NegativeWeight,
    NonFiniteValue,
    PreconditionError,
    RaggedInput,
)

REP_KINDS = ("centroid", "medoid", "selected")


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def fingerprint_arrays(*arrays, extra=None) -> str:
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(a)
        h.update(str(a.dtype).encode())
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    if extra is not None:
        h.update(json.dumps(extra, sort_keys=True, default=str).encode())
    return h.hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class Scenario:
    id: int
    features: np.ndarray
    hours: int
    channels: int

    def __post_init__(self):
        feats = _frozen(self.features)
        if feats.ndim != 1 or feats.size != self.hours * self.channels:
            raise RaggedInput(
                f"scenario {self.id}: {feats.size} features, expected {self.hours}x{self.channels}"
            )
        if not np.all(np.isfinite(feats)):
            raise NonFiniteValue(f"scenario {self.id} contains non-finite values")
        object.__setattr__(self, "features", feats)

    def channel(self, c: int) -> np.ndarray:
        return self.features[c * self.hours:(c + 1) * self.hours]


class ScenarioSet:
    """Weighted set of equal-length multichannel daily profiles.

    Weights are nonnegative reals (cluster sizes / day counts); probabilities
    are derived on demand as ``weight / total``.  Instances are immutable.
    """

    def __init__(self, profiles, weights=None, channel_labels=None, hours=None):
        X = np.asarray(profiles, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] == 0:
            raise RaggedInput("profiles must be a nonempty 2-D matrix")
        if not np.all(np.isfinite(X)):
            bad = int(np.argwhere(~np.isfinite(X))[0, 0])
            raise NonFiniteValue(f"scenario {bad} contains non-finite values")
        n, f = X.shape
        if channel_labels is None:
            channel_labels = ["ch0"] if hours is None else [f"ch{i}" for i in range(f // hours)]
        labels = tuple(str(c) for c in channel_labels)
        if hours is None:
            if f % len(labels):
                raise RaggedInput(f"{f} features do not split into {len(labels)} channels")
            hours = f // len(labels)
        if hours * len(labels) != f:
            raise RaggedInput(f"{f} features != {hours} hours x {len(labels)} channels")
        if weights is None or len(weights) == 0:
            w = np.ones(n)
        else:
            w = np.asarray(weights, dtype=float)
            if w.shape != (n,):
                raise RaggedInput(f"{w.size} weights for {n} scenarios")
            if not np.all(np.isfinite(w)):
                raise NonFiniteValue("weights contain non-finite values")
            if np.any(w < 0):
                raise NegativeWeight("weights must be nonnegative")
        if not w.sum() > 0:
            raise NegativeWeight("weights must have a strictly positive total")
        self._X = _frozen(X)
        self._w = _frozen(w)
        self.channel_labels = labels
        self.hours = int(hours)

    # -- basic accessors --------------------------------------------------
    @property
    def profiles(self) -> np.ndarray:
        return self._X

    @property
    def weights(self) -> np.ndarray:
        return self._w

    @property
    def n(self) -> int:
        return self._X.shape[0]

    def __len__(self):
        return self.n

    @property
    def channels(self) -> int:
        return len(self.channel_labels)

    @property
    def total_weight(self) -> float:
        return float(self._w.sum())

    @property
    def probabilities(self) -> np.ndarray:
        return self._w / self._w.sum()

    @property
    def scenarios(self) -> list[Scenario]:
        return [Scenario(i, self._X[i], self.hours, self.channels) for i in range(self.n)]

    def __getitem__(self, i) -> Scenario:
        return Scenario(int(i), self._X[i], self.hours, self.channels)

    def channel_index(self, label: str) -> int:
        try:
            return self.channel_labels.index(label)
        except ValueError:
            raise KeyError(f"no channel labelled {label!r}") from None

    def channel(self, c) -> np.ndarray:
        """``(n, hours)`` block of channel ``c`` (index or label)."""
        if isinstance(c, str):
            c = self.channel_index(c)
        return self._X[:, c * self.hours:(c + 1) * self.hours]

    def cube(self) -> np.ndarray:
        """Profiles reshaped to ``(n, channels, hours)``."""
        return self._X.reshape(self.n, self.channels, self.hours)

    def fingerprint(self) -> str:
        return fingerprint_arrays(self._X, self._w, extra=[self.channel_labels, self.hours])

    # -- derived sets ------------------------------------------------------
    def with_profiles(self, profiles) -> ScenarioSet:
        return ScenarioSet(profiles, self._w, self.channel_labels, self.hours)

    def with_weights(self, weights) -> ScenarioSet:
        return ScenarioSet(self._X, weights, self.channel_labels, self.hours)

    def subset(self, ids) -> ScenarioSet:
        ids = np.asarray(ids, dtype=int)
        return ScenarioSet(self._X[ids], self._w[ids], self.channel_labels, self.hours)

    def __repr__(self):
        return (f"ScenarioSet(n={self.n}, hours={self.hours}, channels={list(self.channel_labels)}, "
                f"total_weight={self.total_weight:g})")


def make_scenario_set(profiles, weights=(), labels=None, hours=None) -> ScenarioSet:
    """Validate a profile matrix and wrap it as a :class:`ScenarioSet`.

    Rows are scenarios.  ``weights`` may be empty for uniform weights of one.
    Raises ``RaggedInput`` for non-rectangular input, ``NonFiniteValue`` and
    ``NegativeWeight`` for bad values.
    """
    if not isinstance(profiles, np.ndarray):
        rows = list(profiles)
        if len({len(np.atleast_1d(r)) for r in rows}) > 1:
            raise RaggedInput("profile rows have different lengths")
        profiles = np.array(rows, dtype=float)
    return ScenarioSet(profiles, weights if weights is not None and len(weights) else None, labels, hours)


@dataclass(frozen=True, eq=False)
class Partition:
    """Assignment of scenarios to clusters with per-cluster representatives.

    ``representatives`` is a ``(K, n_features)`` matrix; ``cluster_weights[k]``
    is the summed weight of the members of cluster ``k``.
    """

    assignment: np.ndarray
    representatives: np.ndarray
    rep_kind: str
    cluster_weights: np.ndarray
    source_fingerprint: str | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        a = _frozen(self.assignment, dtype=int)
        reps = _frozen(np.atleast_2d(self.representatives))
        cw = _frozen(self.cluster_weights)
        if self.rep_kind not in REP_KINDS:
            raise PreconditionError(f"unknown representation kind {self.rep_kind!r}")
        k = reps.shape[0]
        if a.ndim != 1 or (a.size and (a.min() < 0 or a.max() >= k)):
            raise PreconditionError("assignment indices out of range")
        if np.unique(a).size != k:
            raise PreconditionError("every cluster needs at least one member")
        if cw.shape != (k,):
            raise PreconditionError("one cluster weight per representative required")
        object.__setattr__(self, "assignment", a)
        object.__setattr__(self, "representatives", reps)
        object.__setattr__(self, "cluster_weights", cw)

    @property
    def k(self) -> int:
        return self.representatives.shape[0]

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == k)

    def to_scenario_set(self, like: ScenarioSet) -> ScenarioSet:
        return ScenarioSet(self.representatives, self.cluster_weights, like.channel_labels, like.hours)


def partition_from_assignment(assignment, source: ScenarioSet, representatives=None,
                              rep_kind="centroid", meta=None, relabel=True) -> Partition:
    """Build a Partition; clusters are relabelled by smallest member id.

    Without explicit ``representatives`` the weighted centroids are used.
    """
    a = np.asarray(assignment, dtype=int)
    if a.shape != (source.n,):
        raise MismatchedSource(f"assignment has {a.size} entries for {source.n} scenarios")
    if relabel:
        _, first = np.unique(a, return_index=True)
        order = a[np.sort(first)]
        remap = {int(old): new for new, old in enumerate(order)}
        if representatives is not None:
            representatives = np.asarray(representatives)[order]
        a = np.array([remap[int(v)] for v in a], dtype=int)
    k = int(a.max()) + 1
    w = source.weights
    cw = np.bincount(a, weights=w, minlength=k)
    if representatives is None:
        reps = np.zeros((k, source.profiles.shape[1]))
        np.add.at(reps, a, w[:, None] * source.profiles)
        counts = np.bincount(a, minlength=k).astype(float)
        # zero-weight clusters fall back to the unweighted mean
        denom = np.where(cw > 0, cw, 1.0)
        plain = np.zeros_like(reps)
        np.add.at(plain, a, source.profiles)
        reps = np.where((cw > 0)[:, None], reps / denom[:, None], plain / counts[:, None])
        rep_kind = "centroid"
    else:
        reps = np.asarray(representatives, dtype=float)
    return Partition(a, reps, rep_kind, cw, source.fingerprint(), dict(meta or {}))


def disaggregate(p: Partition, source: ScenarioSet) -> dict[int, list[int]]:
    """Map each cluster index to the sorted ids of its member scenarios."""
    if p.assignment.size != source.n:
        raise MismatchedSource(f"partition covers {p.assignment.size} scenarios, source has {source.n}")
    if p.source_fingerprint is not None and p.source_fingerprint != source.fingerprint():
        raise MismatchedSource("partition was built from a different scenario set")
    return {k: p.members(k).tolist() for k in range(p.k)}


@dataclass(frozen=True, eq=False)
class ReducedSet:
    """A reduced scenario set plus its provenance.

    ``assignment`` maps every source scenario to the index of the reduced
    scenario it is represented by (used for disaggregation); ``kept`` lists
    the source ids of selected scenarios for selection-type methods.
    """

    scenarios: ScenarioSet
    method: str
    params: dict
    source_fingerprint: str
    seed: int | None
    assignment: np.ndarray
    kept: tuple | None = None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def fingerprint(self) -> str:
        return fingerprint_arrays(
            self.scenarios.profiles, self.scenarios.weights,
            extra=[self.source_fingerprint, self.method, self.params, self.seed],
        )

    @property
    def k(self) -> int:
        return self.scenarios.n

    def as_partition(self) -> Partition:
        kind = "selected" if self.kept is not None else self.meta.get("rep_kind", "centroid")
        return Partition(self.assignment, self.scenarios.profiles, kind, self.scenarios.weights,
                         self.source_fingerprint)


def reduced_from_partition(p: Partition, source: ScenarioSet, method: str, params=None,
                           seed=None) -> ReducedSet:
    if p.assignment.size != source.n:
        raise MismatchedSource("partition does not cover the source set")
    return ReducedSet(
        scenarios=p.to_scenario_set(source),
        method=method,
        params=dict(params or {}),
        source_fingerprint=source.fingerprint(),
        seed=seed,
        assignment=p.assignment,
        kept=None,
        meta={"rep_kind": p.rep_kind, **p.meta},
    )
