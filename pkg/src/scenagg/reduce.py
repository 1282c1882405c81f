"""Scenario reduction by probability-distance minimization.

Forward selection greedily builds the kept set minimizing the Kantorovich
distance to the full distribution; the maximum dissimilarity algorithm
instead builds the most diverse set starting from the peak-load day.  Both
hand the probability of every deleted scenario to its nearest kept one.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ReducedSet, ScenarioSet
from .distance import EUCLIDEAN, DistanceSpec, pairwise
from .errors import BadK, EmptyKeptSet, MissingContext, NoLoadChannel

COST_KINDS = ("dupacova", "morales", "bruninx")


@dataclass(frozen=True, eq=False)
class CostMatrix:
    values: np.ndarray
    kind: str
    context: np.ndarray | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("cost matrix must be square")
        if np.any(v < 0) or np.any(np.diag(v) != 0) or not np.array_equal(v, v.T):
            raise ValueError("cost matrix must be nonnegative, symmetric, zero-diagonal")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def cost_matrix(s: ScenarioSet, kind: str = "dupacova", ctx=None) -> CostMatrix:
    """Pairwise transport costs between scenarios.

    ``dupacova`` uses the Euclidean norm of the feature difference.
    ``morales`` and ``bruninx`` use ``|z_i - z_j|`` of per-scenario objective
    values supplied in ``ctx`` (expected-value-fixed and single-scenario
    objectives respectively, see :func:`scenagg.tep.scenario_context`).
    """
    if kind not in COST_KINDS:
        raise ValueError(f"unknown cost kind {kind!r}; expected one of {COST_KINDS}")
    if kind == "dupacova":
        return CostMatrix(pairwise(s.profiles, EUCLIDEAN), kind)
    if ctx is None:
        raise MissingContext(f"{kind} cost needs per-scenario objective values")
    z = np.asarray(ctx, dtype=float)
    if z.shape != (s.n,):
        raise MissingContext(f"expected {s.n} context values, got {z.size}")
    return CostMatrix(np.abs(z[:, None] - z[None, :]), kind, z)


def _cost_values(c):
    return c.values if isinstance(c, CostMatrix) else np.asarray(c, dtype=float)


def kantorovich(full: ScenarioSet, kept, c) -> float:
    """Transport distance between the full set and its restriction to ``kept``."""
    kept = sorted({int(i) for i in kept})
    if not kept:
        raise EmptyKeptSet("kept set is empty")
    C = _cost_values(c)
    pi = full.probabilities
    deleted = np.setdiff1d(np.arange(full.n), kept)
    if deleted.size == 0:
        return 0.0
    return float(pi[deleted] @ C[np.ix_(deleted, kept)].min(axis=1))


def redistribute(s: ScenarioSet, kept, C) -> tuple[np.ndarray, np.ndarray]:
    """Assign every scenario to its nearest kept scenario (ties: lowest id).

    Returns ``(assignment, weights)`` where ``assignment[i]`` indexes into the
    sorted kept list and ``weights`` are the summed source weights.
    """
    kept = np.array(sorted(int(i) for i in kept))
    C = _cost_values(C)
    assign = np.argmin(C[:, kept], axis=1)
    assign[kept] = np.arange(kept.size)
    weights = np.bincount(assign, weights=s.weights, minlength=kept.size)
    return assign, weights


def _reduced(s, kept, C, method, params, order):
    kept = sorted(int(i) for i in kept)
    assign, weights = redistribute(s, kept, C)
    reduced = ScenarioSet(s.profiles[kept], weights, s.channel_labels, s.hours)
    return ReducedSet(reduced, method, params, s.fingerprint(), None, assign,
                      kept=tuple(kept), meta={"rep_kind": "selected", "selection_order": order})


def _check_n(n_keep, n):
    if not (isinstance(n_keep, (int, np.integer)) and 1 <= n_keep <= n):
        raise BadK(f"n_keep={n_keep!r} must be an integer in 1..{n}")
    return int(n_keep)


def forward_selection_order(s: ScenarioSet, n_keep: int, c) -> list[int]:
    """Greedy selection order; each step adds the scenario minimizing
    ``sum_{w not kept} pi_w * min_{kept} c(w, kept)``."""
    n_keep = _check_n(n_keep, s.n)
    C = _cost_values(c)
    pi = s.probabilities
    nearest = np.full(s.n, np.inf)
    order = []
    for _ in range(n_keep):
        M = np.minimum(nearest[:, None], C)
        # kept scenarios and the candidate itself contribute zero (zero diagonal)
        obj = pi @ M
        obj[order] = np.inf
        r = int(np.argmin(obj))
        order.append(r)
        nearest = M[:, r]
    return order


def forward_selection(s: ScenarioSet, n_keep: int, c) -> ReducedSet:
    order = forward_selection_order(s, n_keep, c)
    kind = c.kind if isinstance(c, CostMatrix) else "custom"
    return _reduced(s, order, c, "fsa", {"cost": kind, "n_keep": n_keep, "ties": "lowest-id"}, order)


def load_channel_ids(s: ScenarioSet, load_channels=None) -> list[int]:
    if load_channels is None:
        ids = [i for i, lab in enumerate(s.channel_labels) if lab.lower().startswith("load")]
    else:
        ids = [s.channel_index(c) if isinstance(c, str) else int(c) for c in load_channels]
    if not ids:
        raise NoLoadChannel("no load channel found (labels starting with 'load')")
    return ids


def peak_load_scenario(s: ScenarioSet, load_channels=None) -> int:
    """Scenario with the largest daily energy summed over load channels."""
    ids = load_channel_ids(s, load_channels)
    totals = s.cube()[:, ids, :].sum(axis=(1, 2))
    return int(np.argmax(totals))


def mda(s: ScenarioSet, n_keep: int, spec: DistanceSpec = EUCLIDEAN, load_channels=None,
        D=None) -> ReducedSet:
    """Maximum dissimilarity selection seeded with the peak-load scenario.

    Each step adds the scenario whose distance to the nearest selected one is
    largest (ties: lowest id).
    """
    n_keep = _check_n(n_keep, s.n)
    D = pairwise(s.profiles, spec) if D is None else D
    order = [peak_load_scenario(s, load_channels)]
    nearest = D[:, order[0]].copy()
    for _ in range(1, n_keep):
        cand = nearest.copy()
        cand[order] = -np.inf
        r = int(np.argmax(cand))
        order.append(r)
        nearest = np.minimum(nearest, D[:, r])
    params = {"n_keep": n_keep, "distance": spec.to_dict(), "init": "peak-load"}
    return _reduced(s, order, D, "mda", params, order)
