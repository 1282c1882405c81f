"""Self-organizing map on a rectangular grid."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Partition, ScenarioSet, partition_from_assignment
from .errors import BadGrid, BadSchedule, DimensionMismatch


@dataclass(eq=False)
class SomGrid:
    rows: int
    cols: int
    weights: np.ndarray  # (rows*cols, n_features), node i at (i // cols, i % cols)
    epoch: int = 0
    schedule: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise BadGrid("grid needs at least one row and one column")
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape[0] != self.rows * self.cols:
            raise BadGrid("one weight vector per node required")
        if not np.all(np.isfinite(self.weights)):
            raise BadGrid("non-finite node weights")

    @property
    def coords(self) -> np.ndarray:
        idx = np.arange(self.rows * self.cols)
        return np.stack([idx // self.cols, idx % self.cols], axis=1).astype(float)


def neighborhood(grid_d2, sigma):
    """Gaussian neighborhood; ``sigma == 0`` degenerates to the BMU indicator."""
    if sigma <= 0:
        return (grid_d2 == 0).astype(float)
    return np.exp(-grid_d2 / (2.0 * sigma * sigma))


def decay(start, t, total, final_ratio=0.01):
    """Exponential decay from ``start`` at t=0 to ``start * final_ratio`` at t=total."""
    if total <= 0:
        return start
    return start * final_ratio ** (t / total)


def som_bmu(g: SomGrid, x) -> int:
    x = np.asarray(x, dtype=float).ravel()
    if x.size != g.weights.shape[1]:
        raise DimensionMismatch(f"sample has {x.size} features, grid has {g.weights.shape[1]}")
    d2 = ((g.weights - x) ** 2).sum(axis=1)
    return int(np.argmin(d2))


def som_train(s: ScenarioSet, rows: int, cols: int, epochs: int = 50, lr0: float = 0.5,
              radius0: float | None = None, seed=0, lr_decay: bool = True,
              final_ratio: float = 0.01) -> SomGrid:
    """Online SOM training.

    Weights start uniform over each feature's data range.  Every epoch visits
    the scenarios in a fresh random order; at step ``t`` each node moves by
    ``theta * alpha(t) * (x - w)`` with a Gaussian neighborhood of width
    ``sigma(t)``.  Both ``alpha`` and ``sigma`` decay exponentially to
    ``final_ratio`` of their start value over the run (``lr_decay=False``
    keeps ``alpha`` constant).
    """
    if rows < 1 or cols < 1:
        raise BadGrid("grid needs at least one row and one column")
    if epochs < 1 or not (0 < lr0 <= 1):
        raise BadSchedule("need epochs >= 1 and 0 < lr0 <= 1")
    if radius0 is None:
        radius0 = max(rows, cols) / 2.0
    if radius0 < 0:
        raise BadSchedule("radius0 must be nonnegative")
    rng = np.random.default_rng(seed)
    X = s.profiles
    lo, hi = X.min(axis=0), X.max(axis=0)
    W = lo + rng.random((rows * cols, X.shape[1])) * (hi - lo)
    g = SomGrid(rows, cols, W, 0, {"lr0": lr0, "radius0": radius0, "epochs": epochs,
                                   "neighborhood": "gaussian", "decay": "exponential",
                                   "final_ratio": final_ratio, "seed": seed})
    coords = g.coords
    total = epochs * s.n
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(s.n):
            x = X[i]
            v = int(np.argmin(((W - x) ** 2).sum(axis=1)))
            alpha = decay(lr0, t, total, final_ratio) if lr_decay else lr0
            sigma = decay(radius0, t, total, final_ratio)
            theta = neighborhood(((coords - coords[v]) ** 2).sum(axis=1), sigma)
            W += (theta * alpha)[:, None] * (x - W)
            t += 1
        g.epoch += 1
    g.weights = W
    return g


def som_partition(g: SomGrid, s: ScenarioSet) -> Partition:
    """Cluster scenarios by best matching unit; empty nodes are dropped.

    Representatives are the weighted member means, not the node weights.
    """
    if s.profiles.shape[1] != g.weights.shape[1]:
        raise DimensionMismatch("grid and scenario dimensions differ")
    d2 = ((s.profiles[:, None, :] - g.weights[None, :, :]) ** 2).sum(axis=2)
    bmu = np.argmin(d2, axis=1)
    nodes = np.unique(bmu)
    compact = np.searchsorted(nodes, bmu)
    return partition_from_assignment(compact, s, meta={
        "method": "som", "grid": [g.rows, g.cols], "nodes": nodes.tolist(), **g.schedule})


def som(s: ScenarioSet, k: int, seed=0, epochs=50, lr0=0.5) -> Partition:
    """Train a roughly square grid of ``k`` nodes and partition by BMU."""
    rows = int(math.floor(math.sqrt(k)))
    while k % rows:
        rows -= 1
    g = som_train(s, rows, k // rows, epochs=epochs, lr0=lr0, seed=seed)
    return som_partition(g, s)
