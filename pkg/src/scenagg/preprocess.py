"""Normalization before aggregation and re-scaling of member representatives."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Partition, ScenarioSet
from .errors import DegenerateChannel, MismatchedSource, PreconditionError, ZeroRepresentativeMean

METHODS = ("zscore", "minmax", "maxabs", "none")


@dataclass(frozen=True)
class NormalizationSpec:
    method: str = "zscore"
    per_channel: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown normalization {self.method!r}; expected one of {METHODS}")


@dataclass(frozen=True, eq=False)
class Normalization:
    """Affine map ``z = (x - shift) / scale`` applied feature-wise.

    ``shift`` and ``scale`` are full-length feature vectors so the record can
    be applied to any matrix with the source layout.
    """

    spec: NormalizationSpec
    shift: np.ndarray
    scale: np.ndarray

    def transform(self, X):
        return (np.asarray(X, dtype=float) - self.shift) / self.scale

    def inverse(self, Z):
        return np.asarray(Z, dtype=float) * self.scale + self.shift

    def inverse_set(self, s: ScenarioSet) -> ScenarioSet:
        return s.with_profiles(self.inverse(s.profiles))


def _groups(s: ScenarioSet, per_channel: bool):
    if per_channel:
        return [slice(c * s.hours, (c + 1) * s.hours) for c in range(s.channels)]
    return [slice(0, s.profiles.shape[1])]


def normalize(s: ScenarioSet, spec: NormalizationSpec | None = None):
    """Normalize a scenario set; returns ``(normalized_set, Normalization)``.

    Statistics are taken over all scenarios and hours of a channel (or over
    the whole matrix when ``per_channel`` is false).  z-score uses the
    population standard deviation.
    """
    spec = spec or NormalizationSpec()
    X = s.profiles
    nf = X.shape[1]
    shift = np.zeros(nf)
    scale = np.ones(nf)
    if spec.method != "none":
        for c, sl in enumerate(_groups(s, spec.per_channel)):
            block = X[:, sl]
            label = s.channel_labels[c] if spec.per_channel else "all"
            if spec.method == "zscore":
                sd = block.std()
                if not sd > 0:
                    raise DegenerateChannel(f"channel {label!r} is constant")
                shift[sl], scale[sl] = block.mean(), sd
            elif spec.method == "minmax":
                lo, hi = block.min(), block.max()
                if not hi > lo:
                    raise DegenerateChannel(f"channel {label!r} is constant")
                shift[sl], scale[sl] = lo, hi - lo
            else:
                m = np.abs(block).max()
                if not m > 0:
                    raise DegenerateChannel(f"channel {label!r} is identically zero")
                scale[sl] = m
    rec = Normalization(spec, shift, scale)
    return s.with_profiles(rec.transform(X)), rec


def rescale_representatives(p: Partition, source: ScenarioSet) -> Partition:
    """Scale member representatives so weighted channel means match the source.

    Each channel of every representative is multiplied by
    ``source_mean / weighted_representative_mean``.  Centroids are already
    consistent and are rejected.
    """
    if p.rep_kind == "centroid":
        raise PreconditionError("centroid representatives need no re-scaling")
    if p.assignment.size != source.n:
        raise MismatchedSource("partition does not cover the source set")
    h = source.hours
    reps = p.representatives.reshape(p.k, source.channels, h)
    src = source.cube()
    w = source.weights
    src_mean = np.einsum("i,ich->c", w, src) / (w.sum() * h)
    rep_mean = np.einsum("k,kch->c", p.cluster_weights, reps) / (p.cluster_weights.sum() * h)
    factors = np.ones(source.channels)
    for c in range(source.channels):
        if rep_mean[c] == 0:
            if src_mean[c] != 0:
                raise ZeroRepresentativeMean(f"channel {source.channel_labels[c]!r}")
        else:
            factors[c] = src_mean[c] / rep_mean[c]
    scaled = (reps * factors[None, :, None]).reshape(p.k, -1)
    meta = dict(p.meta, rescale_factors=factors.tolist())
    return Partition(p.assignment, scaled, p.rep_kind, p.cluster_weights, p.source_fingerprint, meta)
