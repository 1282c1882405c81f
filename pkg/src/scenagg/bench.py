"""Benchmark harness: full solve, per-method reductions, gaps, runtimes, sensitivity.

Steps of :func:`run_benchmark`:

1. solve the planning problem on the full scenario set (baseline);
2. reduce the set with every method for every K in ``k_range``;
3. solve each reduced problem and pick, per method, the K with the smallest
   absolute in-sample gap (ties: smaller K);
4. re-evaluate the first stage chosen at that K on the full set (OOS);
5. collect per-method comparison rows;
6. time every method at the largest K over ``repeats`` runs.

Clustering runs on normalized profiles; representatives are always taken
from the raw profiles.  Report JSON excludes wall-clock measurements so that
identical inputs produce identical files.
"""
from __future__ import annotations

import math
import statistics
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .cluster import LINKAGES, ctpc, hac, kmeans, kmedoids, representative
from .core import Partition, ScenarioSet, partition_from_assignment
from .distance import DistanceSpec, pairwise
from .errors import BadK, ScenaggError
from .milp import BnbOptions
from .network import Network
from .preprocess import NormalizationSpec, normalize, rescale_representatives
from .quality import gap_report
from .reduce import CostMatrix, cost_matrix, forward_selection, mda
from .som import som
from .spatial import spectral_partition
from .tep import evaluate_oos, scale_demand, scenario_context, solve_full

CLUSTER_FAMILIES = ("kmeans", "kmedoids", "hac", "ctpc", "som", "spectral")
SELECT_FAMILIES = ("fsa", "mda")
FAMILIES = CLUSTER_FAMILIES + SELECT_FAMILIES
REPRESENTATIONS = ("centroid", "medoid")
FSA_COSTS = ("dupacova", "morales", "bruninx")
DEFAULT_LEVELS = tuple(round(0.6 + 0.2 * i, 1) for i in range(8))


@dataclass(frozen=True)
class MethodSpec:
    family: str
    representation: str | None = None
    linkage: str | None = None
    cost: str | None = None
    distance: str = "euclidean"
    seed: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown method family {self.family!r}; expected one of {FAMILIES}")
        rep = self.representation
        if self.family in SELECT_FAMILIES:
            if rep not in (None, "selected"):
                raise ValueError(f"{self.family} keeps original scenarios; representation must be 'selected'")
            rep = "selected"
        else:
            rep = rep or "centroid"
            if rep not in REPRESENTATIONS:
                raise ValueError(f"representation {rep!r} must be one of {REPRESENTATIONS}")
        object.__setattr__(self, "representation", rep)
        if self.family in ("hac", "ctpc"):
            object.__setattr__(self, "linkage", self.linkage or "ward")
            if self.linkage not in LINKAGES:
                raise ValueError(f"unknown linkage {self.linkage!r}")
        elif self.linkage is not None:
            raise ValueError(f"{self.family} takes no linkage")
        if self.family == "fsa":
            object.__setattr__(self, "cost", self.cost or "dupacova")
            if self.cost not in FSA_COSTS:
                raise ValueError(f"unknown FSA cost {self.cost!r}")
        elif self.cost is not None:
            raise ValueError(f"{self.family} takes no cost function")
        DistanceSpec.parse(self.distance)

    @property
    def name(self) -> str:
        head = self.family
        if self.linkage:
            head += f"-{self.linkage}"
        if self.cost:
            head += f"-{self.cost}"
        if self.distance != "euclidean":
            head += f"@{self.distance}"
        if self.family in SELECT_FAMILIES:
            return head
        return f"{head}/{self.representation}"

    @classmethod
    def parse(cls, text: str) -> MethodSpec:
        """``family[-linkage|-cost][@distance][/representation]``, e.g. ``hac-ward/medoid``."""
        text = text.strip()
        rep = None
        if "/" in text:
            text, rep = text.split("/", 1)
        dist = "euclidean"
        if "@" in text:
            text, dist = text.split("@", 1)
        family, _, extra = text.partition("-")
        kw = {}
        if extra:
            kw["cost" if family == "fsa" else "linkage"] = extra
        return cls(family, rep, distance=dist, **kw)

    def to_dict(self):
        return asdict(self)


DEFAULT_METHODS = tuple(
    [MethodSpec(f, r) for r in REPRESENTATIONS for f in ("kmeans", "kmedoids")]
    + [MethodSpec("hac", r, linkage=lk) for r in REPRESENTATIONS
       for lk in ("ward", "average", "single", "complete")]
    + [MethodSpec("mda")]
    + [MethodSpec("fsa", cost=c) for c in FSA_COSTS]
)


@dataclass(frozen=True)
class BenchOptions:
    k_range: tuple = tuple(range(1, 11))
    mip_gap: float = 1e-3
    seed: int = 0
    repeats: int = 5
    normalization: str = "zscore"
    rescale: bool = False
    oos: str = "optimal"  # or "all"
    lp_backend: str = "highs"
    solver: str = "auto"  # see scenagg.tep.solve_full
    time_limit: float | None = None
    timing: bool = True

    def bnb(self) -> BnbOptions:
        return BnbOptions(rel_gap=self.mip_gap, lp_backend=self.lp_backend, time_limit=self.time_limit)


@dataclass
class Cell:
    method: str
    k: int
    status: str
    seed: int | None = None
    error: str | None = None
    in_sample_objective: float | None = None
    in_sample_gap_pct: float | None = None
    oos_objective: float | None = None
    oos_gap_pct: float | None = None
    built: list = field(default_factory=list)
    capacity: dict = field(default_factory=dict)
    solver_status: str | None = None
    solver_gap: float | None = None
    nodes: int | None = None
    reduced_fingerprint: str | None = None
    weights: list = field(default_factory=list)
    method_time: float | None = None
    solve_time: float | None = None
    log: list = field(default_factory=list)

    def to_dict(self):
        d = asdict(self)
        for key in ("method_time", "solve_time", "log"):
            d.pop(key)
        return d


@dataclass
class MethodSummary:
    method: str
    spec: dict
    optimal_k: int | None
    oos_gap_pct: float | None
    oos_objective: float | None
    built: list
    capacity: dict
    time_mean: float | None = None
    time_sd: float | None = None
    total_time: float | None = None

    def to_dict(self):
        d = asdict(self)
        for key in ("time_mean", "time_sd", "total_time"):
            d.pop(key)
        return d


@dataclass
class SensitivityRow:
    level: float
    objective: float | None
    status: str
    gap: float | None
    nodes: int | None
    built: list
    wall_time: float
    trajectory: list
    log: list
    error: str | None = None

    def to_dict(self):
        return {"level": self.level, "objective": self.objective, "status": self.status,
                "gap": self.gap, "nodes": self.nodes, "built": self.built, "error": self.error}


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def _built_cap(net, sol):
    built = sorted(ln.name for ln in net.candidates if sol.built.get(ln.name))
    cap = {ln.name: _num(sol.capacity[ln.name]) for ln in net.lines
           if ln.name in built or (ln.existing and sol.capacity[ln.name] > ln.base_capacity + 1e-6)}
    return built, cap


@dataclass
class BenchmarkReport:
    network: str
    data_fingerprint: str
    n_scenarios: int
    options: dict
    methods: list
    baseline: dict
    cells: list = field(default_factory=list)
    summaries: list = field(default_factory=list)
    sensitivity: list = field(default_factory=list)
    baseline_time: float | None = None
    baseline_log: list = field(default_factory=list)

    @property
    def failed(self) -> list:
        return [c for c in self.cells if c.status != "ok"] + \
               [r for r in self.sensitivity if r.status == "error"]

    def to_dict(self) -> dict:
        return {
            "network": self.network,
            "data_fingerprint": self.data_fingerprint,
            "n_scenarios": self.n_scenarios,
            "options": self.options,
            "methods": self.methods,
            "baseline": self.baseline,
            "cells": [c.to_dict() for c in self.cells],
            "summaries": [s.to_dict() for s in self.summaries],
            "sensitivity": [r.to_dict() for r in self.sensitivity],
        }

    def tables(self) -> dict:
        """Every CSV table as ``kind -> (header, rows)``."""
        fmt_caps = lambda built, cap: ";".join(f"{k}={cap[k]:.1f}" for k in sorted(cap))
        comparison = (["method", "oos_gap_pct", "built_lines", "capacities_mw", "num_repr"], [
            [s.method, s.oos_gap_pct, ";".join(s.built), fmt_caps(s.built, s.capacity), s.optimal_k]
            for s in self.summaries])
        by_k = (["method", "k", "status", "in_sample_objective", "in_sample_relative",
                 "in_sample_gap_pct", "oos_objective", "oos_relative", "oos_gap_pct", "built_lines",
                 "capacities_mw", "nodes", "error"], [])
        base = self.baseline.get("objective")
        for c in self.cells:
            rel = (c.in_sample_objective / base) if (c.in_sample_objective is not None and base) else None
            orel = (c.oos_objective / base) if (c.oos_objective is not None and base) else None
            by_k[1].append([c.method, c.k, c.status, c.in_sample_objective, rel, c.in_sample_gap_pct,
                            c.oos_objective, orel, c.oos_gap_pct, ";".join(c.built),
                            fmt_caps(c.built, c.capacity), c.nodes, c.error or ""])
        runtime = (["method", "method_time_mean_s", "method_time_sd_s", "total_time_s"],
                   [["full", None, None, self.baseline_time]] +
                   [[s.method, s.time_mean, s.time_sd, s.total_time] for s in self.summaries])
        sens = (["load_pct", "wall_time_s", "nodes", "final_gap", "objective", "status"],
                [[round(100 * r.level), r.wall_time, r.nodes, r.gap, r.objective, r.status]
                 for r in self.sensitivity])
        traj = (["load_pct", "node", "best_bound", "incumbent", "gap", "time_s"],
                [[round(100 * r.level), node, _num(b), _num(inc), _num(g), t]
                 for r in self.sensitivity for node, b, inc, g, t in r.log])
        out = {"comparison": comparison, "comparison_by_k": by_k, "runtime": runtime}
        if self.sensitivity:
            out["sensitivity"] = sens
            out["sensitivity_trajectory"] = traj
        return out


def _rep_partition(spec: MethodSpec, p: Partition, s_norm: ScenarioSet, s_raw: ScenarioSet,
                   dspec: DistanceSpec, D=None) -> Partition:
    """Representatives for a partition found in normalized space, taken from raw data."""
    if spec.representation == "centroid":
        return partition_from_assignment(p.assignment, s_raw, meta=p.meta, relabel=False)
    med = representative(p, s_norm, "medoid", dspec, D)
    ids = med.meta["representative_ids"]
    return Partition(p.assignment, s_raw.profiles[ids], "medoid", med.cluster_weights,
                     s_raw.fingerprint(), dict(med.meta))


def reduce_scenarios(spec: MethodSpec, s_raw: ScenarioSet, k: int, *, seed: int = 0,
                     normalization: str = "zscore", rescale: bool = False, context=None,
                     s_norm: ScenarioSet | None = None, D=None) -> ScenarioSet:
    """Reduce ``s_raw`` to ``k`` weighted scenarios with one method."""
    if not (isinstance(k, (int, np.integer)) and 1 <= k <= s_raw.n):
        raise BadK(f"k={k!r} must be in 1..{s_raw.n}")
    if s_norm is None:
        s_norm = normalize(s_raw, NormalizationSpec(normalization))[0] if normalization != "none" else s_raw
    dspec = DistanceSpec.parse(spec.distance)
    seed = spec.seed if spec.seed is not None else seed
    fam = spec.family
    if fam in SELECT_FAMILIES:
        if fam == "fsa":
            if spec.cost == "dupacova":
                C = CostMatrix(pairwise(s_norm.profiles, dspec) if D is None else D, "dupacova")
            else:
                C = cost_matrix(s_norm, spec.cost, context)
            r = forward_selection(s_norm, k, C)
        else:
            r = mda(s_raw, k, dspec, D=pairwise(s_norm.profiles, dspec) if D is None else D)
        kept = list(r.kept)
        return ScenarioSet(s_raw.profiles[kept], r.scenarios.weights, s_raw.channel_labels, s_raw.hours)
    if fam == "kmeans":
        p = kmeans(s_norm, k, seed=seed)
    elif fam == "kmedoids":
        p = kmedoids(s_norm, k, dspec, seed=seed, D=D)
    elif fam == "hac":
        p, _ = hac(s_norm, k, spec.linkage, dspec)
    elif fam == "ctpc":
        p, _ = ctpc(s_norm, k, spec.linkage, dspec)
    elif fam == "som":
        p = som(s_norm, k, seed=seed)
    else:  # spectral over a Gaussian similarity graph of scenarios
        Dm = pairwise(s_norm.profiles, dspec) if D is None else D
        pos = Dm[Dm > 0]
        bw = float(np.median(pos)) if pos.size else 1.0
        A = np.exp(-(Dm ** 2) / (2 * bw * bw))
        np.fill_diagonal(A, 0.0)
        sp_ = spectral_partition(A, k, seed=seed)
        p = partition_from_assignment(sp_.assignment, s_norm)
    p = _rep_partition(spec, p, s_norm, s_raw, dspec, D)
    if rescale and p.rep_kind != "centroid":
        p = rescale_representatives(p, s_raw)
    return p.to_scenario_set(s_raw)


def canonical_order(s: ScenarioSet) -> ScenarioSet:
    """Scenarios sorted lexicographically by (profile, weight).

    The planning problem does not depend on scenario order, so sets that
    differ only by a permutation share one solve.
    """
    keys = np.column_stack([s.profiles, s.weights])
    order = np.lexsort(keys.T[::-1])
    return s.subset(order)


class _SolveCache:
    """Memoizes solves by scenario-set content up to permutation."""

    def __init__(self, net, opts):
        self.net, self.opts = net, opts
        self.solves, self.oos = {}, {}

    def solve(self, s: ScenarioSet):
        s = canonical_order(s)
        key = s.fingerprint()
        if key not in self.solves:
            t = time.perf_counter()
            sol = solve_full(self.net, s, self.opts.bnb(), self.opts.solver)
            self.solves[key] = (sol, time.perf_counter() - t)
        return self.solves[key]

    def evaluate(self, first_stage, full):
        key = (tuple(sorted(first_stage.built.items())),
               tuple(sorted((k, repr(float(v))) for k, v in first_stage.capacity.items())))
        if key not in self.oos:
            self.oos[key] = evaluate_oos(self.net, first_stage, full, self.opts.lp_backend)
        return self.oos[key]


def _context_for(spec, net, s, cache, opts):
    if spec.family != "fsa" or spec.cost == "dupacova":
        return None
    kind = "dp" if spec.cost == "morales" else "ss"
    if kind not in cache:
        cache[kind] = scenario_context(net, s, kind, opts.bnb())
    return cache[kind]


def run_benchmark(net: Network, scenarios: ScenarioSet, methods=DEFAULT_METHODS,
                  opts: BenchOptions | None = None, progress=None) -> BenchmarkReport:
    opts = opts or BenchOptions()
    methods = [m if isinstance(m, MethodSpec) else MethodSpec.parse(m) for m in methods]
    if not methods:
        raise ValueError("no methods given")
    ks = sorted({int(k) for k in opts.k_range})
    if not ks or ks[0] < 1 or ks[-1] > scenarios.n:
        raise BadK(f"k_range must lie within 1..{scenarios.n}")
    say = progress or (lambda msg: None)
    cache = _SolveCache(net, opts)
    say(f"full solve over {scenarios.n} scenarios")
    base_sol, base_time = cache.solve(scenarios)
    b_built, b_cap = _built_cap(net, base_sol)
    baseline = {"objective": base_sol.objective, "built": b_built, "capacity": b_cap,
                "status": base_sol.status, "gap": base_sol.gap, "nodes": base_sol.nodes,
                "investment_cost": base_sol.investment_cost, "shed_energy_mwh": base_sol.shed_energy,
                "num_repr": scenarios.n}
    s_norm = (normalize(scenarios, NormalizationSpec(opts.normalization))[0]
              if opts.normalization != "none" else scenarios)
    dist_cache, ctx_cache = {}, {}
    report = BenchmarkReport(net.name, scenarios.fingerprint(), scenarios.n,
                             {**asdict(opts), "k_range": ks}, [m.to_dict() | {"name": m.name} for m in methods],
                             baseline, baseline_time=base_time, baseline_log=base_sol.log)
    for m in methods:
        say(f"method {m.name}")
        D = dist_cache.setdefault(m.distance, pairwise(s_norm.profiles, DistanceSpec.parse(m.distance))
                                  if m.family != "som" else None)
        cells = []
        for k in ks:
            cell = Cell(m.name, k, "ok", m.seed if m.seed is not None else opts.seed)
            try:
                t = time.perf_counter()
                ctx = _context_for(m, net, scenarios, ctx_cache, opts)
                red = reduce_scenarios(m, scenarios, k, seed=opts.seed, normalization=opts.normalization,
                                       rescale=opts.rescale, context=ctx, s_norm=s_norm, D=D)
                cell.method_time = time.perf_counter() - t
                sol, st = cache.solve(red)
                cell.solve_time = st
                cell.reduced_fingerprint = red.fingerprint()
                cell.weights = red.weights.tolist()
                cell.in_sample_objective = sol.objective
                cell.in_sample_gap_pct = 100.0 * (sol.objective - base_sol.objective) / base_sol.objective
                cell.built, cell.capacity = _built_cap(net, sol)
                cell.solver_status, cell.solver_gap, cell.nodes = sol.status, sol.gap, sol.nodes
                cell.log = sol.log
                cell._first_stage = sol.first_stage
            except (ScenaggError, ValueError, ArithmeticError) as exc:
                cell.status, cell.error = "error", f"{type(exc).__name__}: {exc}"
            cells.append(cell)
        ok = [c for c in cells if c.status == "ok"]
        best = min(ok, key=lambda c: (abs(c.in_sample_gap_pct), c.k)) if ok else None
        for c in ok:
            if opts.oos == "all" or c is best:
                try:
                    oos = cache.evaluate(c._first_stage, scenarios)
                    g = gap_report(base_sol.objective, c.in_sample_objective, oos)
                    c.oos_objective, c.oos_gap_pct = oos, g.oos_gap_pct
                except (ScenaggError, ValueError, ArithmeticError) as exc:
                    c.status, c.error = "error", f"{type(exc).__name__}: {exc}"
        summ = MethodSummary(m.name, m.to_dict(), best.k if best else None,
                             best.oos_gap_pct if best else None, best.oos_objective if best else None,
                             best.built if best else [], best.capacity if best else {})
        if opts.timing and ok:
            kmax = ks[-1]
            last = next((c for c in cells if c.k == kmax and c.status == "ok"), None)
            times = []
            for _ in range(max(1, opts.repeats)):
                t = time.perf_counter()
                ctx = scenario_context(net, scenarios, "dp" if m.cost == "morales" else "ss", opts.bnb()) \
                    if (m.family == "fsa" and m.cost != "dupacova") else None
                reduce_scenarios(m, scenarios, kmax, seed=opts.seed, normalization=opts.normalization,
                                 rescale=opts.rescale, context=ctx, s_norm=s_norm, D=D)
                times.append(time.perf_counter() - t)
            summ.time_mean = statistics.fmean(times)
            summ.time_sd = statistics.stdev(times) if len(times) > 1 else 0.0
            if last is not None:
                summ.total_time = summ.time_mean + (last.solve_time or 0.0)
        for c in cells:
            if hasattr(c, "_first_stage"):
                del c._first_stage
        report.cells.extend(cells)
        report.summaries.append(summ)
    return report


@dataclass
class SensitivityReport:
    network: str
    data_fingerprint: str
    n_scenarios: int
    options: dict
    rows: list

    @property
    def failed(self) -> list:
        return [r for r in self.rows if r.status == "error"]

    def to_dict(self) -> dict:
        return {"network": self.network, "data_fingerprint": self.data_fingerprint,
                "n_scenarios": self.n_scenarios, "options": self.options,
                "sensitivity": [r.to_dict() for r in self.rows]}

    def tables(self) -> dict:
        holder = BenchmarkReport(self.network, self.data_fingerprint, self.n_scenarios, self.options,
                                 [], {}, sensitivity=self.rows)
        t = holder.tables()
        return {k: t[k] for k in ("sensitivity", "sensitivity_trajectory") if k in t}


def run_sensitivity(net: Network, scenarios: ScenarioSet, load_levels=DEFAULT_LEVELS,
                    opts: BenchOptions | None = None, progress=None) -> list[SensitivityRow]:
    """Solve with all demands scaled by each level; record time, nodes and gap trajectory."""
    opts = opts or BenchOptions()
    levels = [float(v) for v in load_levels]
    for v in levels:
        if not v > 0:
            raise ValueError(f"load multiplier must be positive, got {v}")
    say = progress or (lambda msg: None)
    rows = []
    for v in levels:
        say(f"load level {v:.0%}")
        t = time.perf_counter()
        try:
            sol = solve_full(scale_demand(net, v), scenarios, opts.bnb(), opts.solver)
        except ScenaggError as exc:
            rows.append(SensitivityRow(v, None, "error", None, None, [], time.perf_counter() - t, [], [],
                                       f"{type(exc).__name__}: {exc}"))
            continue
        rows.append(SensitivityRow(v, sol.objective, sol.status, sol.gap, sol.nodes,
                                   sorted(ln.name for ln in net.candidates if sol.built.get(ln.name)),
                                   time.perf_counter() - t, sol.trajectory, sol.log))
    return rows
