"""Best-bound branch-and-bound over binary variables."""
from __future__ import annotations

import csv
import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import Infeasible, NodeLimit, NumericalBreakdown, TimeLimit
from .lp import lp_session
from .model import MilpInstance

INT_TOL = 1e-6
FEAS_TOL = 1e-6
BRANCHING = ("most_fractional",)


@dataclass(frozen=True)
class BnbOptions:
    rel_gap: float = 1e-3
    node_limit: int | None = None
    time_limit: float | None = None
    branching: str = "most_fractional"
    lp_backend: str = "highs"
    # ceil-rounding dive from the root and every ``heuristic_every`` nodes; 0 disables
    heuristic_every: int = 25

    def __post_init__(self):
        if not self.rel_gap >= 0:
            raise ValueError("rel_gap must be nonnegative")
        if self.branching not in BRANCHING:
            raise ValueError(f"unknown branching rule {self.branching!r}")


@dataclass
class BnbResult:
    status: str  # optimal | gap_reached | node_limit | time_limit
    objective: float
    incumbent: np.ndarray
    gap: float
    bound: float
    nodes: int
    branched: int
    trajectory: list  # (time, gap) after every bound or incumbent change
    log: list = field(default_factory=list)  # (node, bound, incumbent, gap, time)
    lp_solves: int = 0

    def write_log(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["node", "best_bound", "incumbent", "gap", "time"])
            for row in self.log:
                w.writerow([row[0], repr(row[1]), repr(row[2]), repr(row[3]), f"{row[4]:.6f}"])


def relative_gap(incumbent, bound) -> float:
    if not math.isfinite(incumbent):
        return math.inf
    diff = max(incumbent - bound, 0.0)
    if diff == 0:
        return 0.0
    return diff / max(abs(incumbent), 1e-10)


def _branch_var(x, bins):
    frac = np.abs(x[bins] - np.round(x[bins]))
    if frac.max(initial=0.0) <= INT_TOL:
        return None
    score = np.abs(x[bins] - np.floor(x[bins]) - 0.5)
    cand = np.flatnonzero(frac > INT_TOL)
    return int(bins[cand[np.argmin(score[cand])]])  # argmin returns the lowest index on ties


class _Search:
    def __init__(self, inst: MilpInstance, opts: BnbOptions):
        self.inst, self.opts = inst, opts
        self.session = lp_session(inst, opts.lp_backend)
        self.bins = inst.binaries
        self.t0 = time.perf_counter()
        self.inc_obj = math.inf
        self.inc_x = None
        self.bound = -math.inf
        self.nodes = 0
        self.branched = 0
        self.trajectory = []
        self.log = []
        self.lp_solves = 0
        self._last = None

    def elapsed(self):
        return time.perf_counter() - self.t0

    def record(self):
        g = relative_gap(self.inc_obj, self.bound)
        key = (self.bound, self.inc_obj)
        if key == self._last:
            return
        self._last = key
        t = self.elapsed()
        if math.isfinite(g):
            self.trajectory.append((t, g))
        self.log.append((self.nodes, self.bound, self.inc_obj, g, t))

    def lp(self, lb, ub):
        self.lp_solves += 1
        res = self.session.solve(lb, ub)
        if res.status == "unbounded":
            raise NumericalBreakdown("LP relaxation is unbounded")
        if res.status.startswith("error") or res.status == "iteration_limit":
            raise NumericalBreakdown(f"LP backend failed: {res.status}")
        return res

    def try_incumbent(self, x, obj):
        if obj >= self.inc_obj:
            return False
        x = x.copy()
        x[self.bins] = np.round(x[self.bins])
        if self.inst.violation(x) > FEAS_TOL * max(1.0, np.abs(self.inst.rhs).max(initial=1.0)):
            return False
        self.inc_obj = self.inst.objective(x)
        self.inc_x = x
        return True

    def round_up(self, x, lb, ub):
        """Fix every binary to the ceiling of its LP value and re-solve."""
        fix = np.ceil(x[self.bins] - INT_TOL)
        lb2, ub2 = lb.copy(), ub.copy()
        lb2[self.bins] = np.maximum(lb[self.bins], fix)
        ub2[self.bins] = np.maximum(np.minimum(ub[self.bins], fix), lb2[self.bins])
        res = self.lp(lb2, ub2)
        if res.ok and self.try_incumbent(res.x, res.objective):
            self.record()

    def prune_level(self):
        if not math.isfinite(self.inc_obj):
            return math.inf
        return self.inc_obj - self.opts.rel_gap * abs(self.inc_obj) - 1e-9 * max(1.0, abs(self.inc_obj))

    def run(self) -> BnbResult:
        inst, opts = self.inst, self.opts
        lb0, ub0 = inst.lb.copy(), inst.ub.copy()
        root = self.lp(lb0, ub0)
        self.nodes = 1
        if root.status == "infeasible":
            raise Infeasible("LP relaxation is infeasible")
        self.bound = root.objective
        heap = []
        counter = 0
        pruned_min = math.inf
        if _branch_var(root.x, self.bins) is None:
            self.try_incumbent(root.x, root.objective)
        else:
            heapq.heappush(heap, (root.objective, counter, lb0, ub0, root.x))
            counter += 1
            if opts.heuristic_every:
                self.round_up(root.x, lb0, ub0)
        self.record()
        status = "optimal"
        while heap:
            bnd, _, lb, ub, x = heap[0]
            self.bound = min(bnd, pruned_min, self.inc_obj)
            self.record()
            if relative_gap(self.inc_obj, self.bound) <= opts.rel_gap:
                status = "gap_reached" if self.bound < self.inc_obj else "optimal"
                break
            if opts.node_limit is not None and self.nodes >= opts.node_limit:
                status = "node_limit"
                break
            if opts.time_limit is not None and self.elapsed() >= opts.time_limit:
                status = "time_limit"
                break
            heapq.heappop(heap)
            if bnd >= self.prune_level():
                pruned_min = min(pruned_min, bnd)
                continue
            j = _branch_var(x, self.bins)
            self.branched += 1
            for val in (0.0, 1.0):
                clb, cub = lb.copy(), ub.copy()
                clb[j] = cub[j] = val
                res = self.lp(clb, cub)
                self.nodes += 1
                if not res.ok:
                    continue
                if res.objective >= self.prune_level():
                    pruned_min = min(pruned_min, res.objective)
                    continue
                if _branch_var(res.x, self.bins) is None:
                    if self.try_incumbent(res.x, res.objective):
                        self.record()
                else:
                    # a child's bound never undercuts its parent's
                    heapq.heappush(heap, (max(res.objective, bnd), counter, clb, cub, res.x))
                    counter += 1
            if opts.heuristic_every and self.branched % opts.heuristic_every == 0 and heap:
                self.round_up(heap[0][4], heap[0][2], heap[0][3])
        else:
            self.bound = min(pruned_min, self.inc_obj)
            if self.bound < self.inc_obj:
                status = "gap_reached"
        if self.inc_x is None:
            if status == "node_limit":
                raise NodeLimit("node limit reached without a feasible solution")
            if status == "time_limit":
                raise TimeLimit("time limit reached without a feasible solution")
            raise Infeasible("no binary assignment is feasible")
        self.record()
        return BnbResult(status, self.inc_obj, self.inc_x, relative_gap(self.inc_obj, self.bound),
                         self.bound, self.nodes, self.branched, self.trajectory, self.log,
                         self.lp_solves)


def branch_and_bound(inst: MilpInstance, opts: BnbOptions | None = None) -> BnbResult:
    """Minimize ``inst`` exactly up to ``opts.rel_gap``.

    Open nodes are explored lowest LP bound first (creation order on ties),
    branching on the binary closest to one half.  Node and time limits return
    the best incumbent with ``status`` naming the limit.
    """
    opts = opts or BnbOptions()
    inst.validate()
    return _Search(inst, opts).run()
