"""Two-stage stochastic transmission expansion planning on a DC network.

First stage: build decisions ``x`` for candidate lines and capacities
``f_max`` for every line.  Second stage, per scenario ``k`` and hour ``t``:
bus angles, line flows, conventional and renewable dispatch and load shed.

Flow convention: ``f = -b (theta_i - theta_j)`` with ``b = base_mva *
susceptance`` in MW/rad, and a positive ``f`` leaves ``i`` towards ``j``.
The flow-definition pair is relaxed by ``M = 2 pi b + F_max`` when a
candidate is not built.  Existing lines have ``x = 1`` fixed; only capacity
above their base rating is paid for.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .core import ScenarioSet
from .errors import InfeasibleBounds, NumericalBreakdown, TimeLimit, UnboundChannel
from .milp import BnbOptions, MilpBuilder, MilpInstance, branch_and_bound, lp_session
from .network import Network

FLOW_TOL = 1e-6


@dataclass(frozen=True)
class FirstStage:
    built: dict  # line name -> bool
    capacity: dict  # line name -> MW

    def to_dict(self):
        return {"built": dict(self.built), "capacity": dict(self.capacity)}


@dataclass
class TepSolution:
    built: dict
    capacity: dict
    objective: float
    investment_cost: float
    operational_cost: np.ndarray  # per scenario, unweighted
    shed_energy: float  # weighted MWh
    status: str
    gap: float
    nodes: int = 0
    trajectory: list = field(default_factory=list)
    log: list = field(default_factory=list)
    x: np.ndarray | None = None

    @property
    def first_stage(self) -> FirstStage:
        return FirstStage(dict(self.built), dict(self.capacity))

    @property
    def built_lines(self) -> list:
        return sorted(k for k, v in self.built.items() if v)


def _bound_profiles(net: Network, s: ScenarioSet):
    labels = set(s.channel_labels)
    for el in (*net.demands, *net.renewables):
        if el.channel not in labels:
            raise UnboundChannel(f"{el.name} is bound to channel {el.channel!r}, "
                                 f"scenario channels are {sorted(labels)}")
    nb = len(net.buses)
    D = np.zeros((s.n, s.hours, nb))
    for d in net.demands:
        D[:, :, net.bus_index(d.bus)] += d.scale * s.channel(d.channel)
    R = np.zeros((s.n, s.hours, len(net.renewables)))
    for r, ren in enumerate(net.renewables):
        R[:, :, r] = ren.capacity * s.channel(ren.channel)
    if np.any(D < 0) or np.any(R < 0):
        raise InfeasibleBounds("negative demand or renewable availability")
    return D, R


def big_m(net: Network) -> np.ndarray:
    return np.array([2 * math.pi * net.base_mva * ln.susceptance + ln.f_max for ln in net.lines])


def capacity_bounds(ln) -> tuple[float, float]:
    if ln.existing:
        return max(ln.f_min, ln.base_capacity), ln.f_max
    return 0.0, ln.f_max


def investment_cost(net: Network, built, capacity) -> float:
    total = 0.0
    for ln in net.lines:
        cap = float(capacity.get(ln.name, 0.0))
        if ln.existing:
            total += ln.cost_variable * (cap - ln.base_capacity)
        elif built.get(ln.name, False):
            total += ln.cost_fixed + ln.cost_variable * cap
    return total


def build_tep(net: Network, s: ScenarioSet, first_stage: FirstStage | None = None) -> MilpInstance:
    """Assemble the planning MILP for ``s``.

    With ``first_stage`` given, build and capacity variables are fixed and the
    instance is the recourse LP.  ``meta`` holds the variable index blocks.
    """
    D, R = _bound_profiles(net, s)
    K, T = s.n, s.hours
    nb, L = len(net.buses), len(net.lines)
    G, NR = len(net.generators), len(net.renewables)
    KT = K * T
    w = s.weights
    lines = net.lines
    cand = [i for i, ln in enumerate(lines) if not ln.existing]
    fi = np.array([net.bus_index(ln.from_bus) for ln in lines], dtype=int)
    ti = np.array([net.bus_index(ln.to_bus) for ln in lines], dtype=int)
    b = np.array([net.base_mva * ln.susceptance for ln in lines])
    M = big_m(net)

    bld = MilpBuilder(f"tep_{net.name}")
    # first stage
    xlo = np.zeros(len(cand))
    xhi = np.ones(len(cand))
    flo = np.array([capacity_bounds(ln)[0] for ln in lines])
    fhi = np.array([capacity_bounds(ln)[1] for ln in lines])
    if first_stage is not None:
        for p, li in enumerate(cand):
            xlo[p] = xhi[p] = float(bool(first_stage.built.get(lines[li].name, False)))
        for li, ln in enumerate(lines):
            cap = float(first_stage.capacity.get(ln.name, 0.0))
            if ln.existing:
                lo, hi = flo[li], fhi[li]
            elif first_stage.built.get(ln.name, False):
                lo, hi = ln.f_min, ln.f_max
            else:
                lo = hi = 0.0
            if cap < lo - 1e-9 or cap > hi + 1e-9:
                raise InfeasibleBounds(f"capacity {cap} of {ln.name} outside [{lo}, {hi}]")
            flo[li] = fhi[li] = cap
    x = bld.add_vars(len(cand), xlo, xhi, [lines[i].cost_fixed for i in cand],
                     binary=first_stage is None, names=[f"x[{lines[i].name}]" for i in cand])
    fcost = np.array([ln.cost_variable for ln in lines])
    fmax = bld.add_vars(L, flo, fhi, fcost, names=[f"fmax[{ln.name}]" for ln in lines])
    bld.offset = -float(sum(ln.cost_variable * ln.base_capacity for ln in lines if ln.existing))

    def kt_names(prefix, labels):
        return [f"{prefix}[{k},{t},{lab}]" for k in range(K) for t in range(T) for lab in labels]

    wkt = np.repeat(w, T)  # weight per (k, t) block
    ref = 0
    th_lo = np.full((KT, nb), -np.inf)
    th_hi = np.full((KT, nb), np.inf)
    th_lo[:, ref] = th_hi[:, ref] = 0.0
    theta = bld.add_vars(KT * nb, th_lo.ravel(), th_hi.ravel(), 0.0,
                         names=kt_names("th", net.buses)).reshape(KT, nb)
    flow = bld.add_vars(KT * L, -np.inf, np.inf, 0.0,
                        names=kt_names("f", [ln.name for ln in lines])).reshape(KT, L)
    gcost = np.array([g.cost for g in net.generators])
    pg = bld.add_vars(KT * G, 0.0, np.tile([g.p_max for g in net.generators], KT),
                      (wkt[:, None] * gcost[None, :]).ravel(),
                      names=kt_names("pg", [g.name for g in net.generators])).reshape(KT, G)
    rcost = np.array([r.cost for r in net.renewables])
    pr = bld.add_vars(KT * NR, 0.0, R.reshape(KT, NR).ravel(),
                      (wkt[:, None] * rcost[None, :]).ravel(),
                      names=kt_names("pr", [r.name for r in net.renewables])).reshape(KT, NR)
    shed = bld.add_vars(KT * nb, 0.0, D.reshape(KT, nb).ravel(),
                        np.repeat(wkt * net.shed_cost, nb),
                        names=kt_names("shed", net.buses)).reshape(KT, nb)
    kt_tags = [f"{k},{t}" for k in range(K) for t in range(T)]
    blk = np.arange(KT)

    def rows_for(n_local, entries, sense, rhs, tag, labels):
        """``entries``: list of (local row, column array over KT, coefficient)."""
        r, c, v = [], [], []
        for lr, cols, coef in entries:
            cols = np.broadcast_to(cols, (KT,))
            r.append(blk * n_local + lr)
            c.append(cols)
            v.append(np.broadcast_to(np.asarray(coef, float), (KT,)))
        names = [f"{tag}[{kt},{lab}]" for kt in kt_tags for lab in labels]
        rr = np.concatenate(r) if r else np.zeros(0, int)
        return bld.add_rows(rr, np.concatenate(c) if c else rr, np.concatenate(v) if v else rr,
                            sense, rhs, names)

    # nodal balance: gen + ren - out + in + shed = demand
    ent = []
    for g, gen in enumerate(net.generators):
        ent.append((net.bus_index(gen.bus), pg[:, g], 1.0))
    for r, ren in enumerate(net.renewables):
        ent.append((net.bus_index(ren.bus), pr[:, r], 1.0))
    for li in range(L):
        ent.append((fi[li], flow[:, li], -1.0))
        ent.append((ti[li], flow[:, li], 1.0))
    for n in range(nb):
        ent.append((n, shed[:, n], 1.0))
    bal = rows_for(nb, ent, "E", D.reshape(KT, nb).ravel(), "bal", net.buses)

    # flow definition, relaxed by M (1 - x) for candidates
    cpos = {li: p for p, li in enumerate(cand)}
    for side, sense in ((0, "L"), (1, "G")):
        ent, rhs = [], np.zeros((KT, L))
        for li in range(L):
            ent += [(li, flow[:, li], 1.0), (li, theta[:, fi[li]], b[li]), (li, theta[:, ti[li]], -b[li])]
            if li in cpos:
                sgn = 1.0 if side == 0 else -1.0
                ent.append((li, x[cpos[li]], sgn * M[li]))
                rhs[:, li] = sgn * M[li]
        rows_for(L, ent, sense, rhs.ravel(), "fdu" if side == 0 else "fdl", [ln.name for ln in lines])
    # thermal capacity
    rows_for(L, [(li, flow[:, li], 1.0) for li in range(L)] + [(li, fmax[li], -1.0) for li in range(L)],
             "L", 0.0, "cu", [ln.name for ln in lines])
    rows_for(L, [(li, flow[:, li], 1.0) for li in range(L)] + [(li, fmax[li], 1.0) for li in range(L)],
             "G", 0.0, "cl", [ln.name for ln in lines])
    # angle difference limits
    ent = [(li, theta[:, fi[li]], 1.0) for li in range(L)] + [(li, theta[:, ti[li]], -1.0) for li in range(L)]
    rows_for(L, ent, "L", math.pi, "au", [ln.name for ln in lines])
    rows_for(L, ent, "G", -math.pi, "al", [ln.name for ln in lines])
    # ramping between consecutive hours of the same day
    if T > 1:
        cur = np.array([k * T + t for k in range(K) for t in range(1, T)])
        for g, gen in enumerate(net.generators):
            for lim, sense, tag in ((gen.ramp_up, "L", "ru"), (gen.ramp_down, "G", "rd")):
                if not math.isfinite(lim):
                    continue
                n = cur.size
                bld.add_rows(np.concatenate([np.arange(n), np.arange(n)]),
                             np.concatenate([pg[cur, g], pg[cur - 1, g]]),
                             np.concatenate([np.ones(n), -np.ones(n)]), sense, lim,
                             [f"{tag}[{k},{t},{gen.name}]" for k in range(K) for t in range(1, T)])
    # capacity window of candidates: F_min x <= f_max <= F_max x
    if cand:
        p = np.arange(len(cand))
        bld.add_rows(np.concatenate([p, p]), np.concatenate([fmax[cand], x]),
                     np.concatenate([np.ones(len(cand)), [-lines[i].f_min for i in cand]]),
                     "G", 0.0, [f"fminx[{lines[i].name}]" for i in cand])
        bld.add_rows(np.concatenate([p, p]), np.concatenate([fmax[cand], x]),
                     np.concatenate([np.ones(len(cand)), [-lines[i].f_max for i in cand]]),
                     "L", 0.0, [f"fmaxx[{lines[i].name}]" for i in cand])
    inst = bld.build()
    n_bal = bal.size
    assert n_bal == nb * T * K
    assert sum(1 for nm in inst.row_names if nm.startswith(("fdu[", "fdl["))) == 2 * L * T * K
    inst.meta.update({
        "K": K, "T": T, "x": x, "fmax": fmax, "theta": theta, "flow": flow, "pg": pg, "pr": pr,
        "shed": shed, "candidates": [lines[i].name for i in cand], "weights": w.copy(),
        "fixed_first_stage": first_stage is not None,
    })
    return inst.validate()


def _first_stage_from(net, inst, xv) -> FirstStage:
    meta = inst.meta
    built = {ln.name: True for ln in net.existing}
    for p, name in enumerate(meta["candidates"]):
        built[name] = bool(round(xv[meta["x"][p]]))
    capacity = {}
    for li, ln in enumerate(net.lines):
        cap = float(xv[meta["fmax"][li]])
        capacity[ln.name] = cap if built[ln.name] else 0.0
    return FirstStage(built, capacity)


def _operational(net, inst, xv) -> tuple[np.ndarray, float]:
    meta = inst.meta
    K, T = meta["K"], meta["T"]
    gcost = np.array([g.cost for g in net.generators])
    rcost = np.array([r.cost for r in net.renewables])
    pg = xv[meta["pg"]].reshape(K, T, -1)
    pr = xv[meta["pr"]].reshape(K, T, -1)
    sh = xv[meta["shed"]].reshape(K, T, -1)
    op = (pg @ gcost).sum(axis=1) + (pr @ rcost).sum(axis=1) + net.shed_cost * sh.sum(axis=(1, 2))
    shed_mwh = float(meta["weights"] @ sh.sum(axis=(1, 2)))
    return op, shed_mwh


SOLVE_METHODS = ("monolithic", "decomposed", "auto")
# above this many scenarios ``auto`` switches to the decomposition
AUTO_DECOMPOSE_ABOVE = 30


def solve_full(net: Network, s: ScenarioSet, opts: BnbOptions | None = None,
               method: str = "monolithic") -> TepSolution:
    """Solve the planning problem over every scenario of ``s``.

    ``monolithic`` runs branch-and-bound on the extensive form;
    ``decomposed`` runs :func:`solve_decomposed`; ``auto`` picks the latter
    for sets larger than ``AUTO_DECOMPOSE_ABOVE``.
    """
    opts = opts or BnbOptions()
    if method == "auto":
        method = "decomposed" if s.n > AUTO_DECOMPOSE_ABOVE else "monolithic"
    if method == "decomposed":
        return solve_decomposed(net, s, opts)
    if method != "monolithic":
        raise ValueError(f"unknown solve method {method!r}; expected one of {SOLVE_METHODS}")
    inst = build_tep(net, s)
    res = branch_and_bound(inst, opts)
    fs = _first_stage_from(net, inst, res.incumbent)
    op, shed_mwh = _operational(net, inst, res.incumbent)
    return TepSolution(
        built=fs.built, capacity=fs.capacity, objective=res.objective,
        investment_cost=investment_cost(net, fs.built, fs.capacity),
        operational_cost=op, shed_energy=shed_mwh, status=res.status, gap=res.gap,
        nodes=res.nodes, trajectory=res.trajectory, log=res.log, x=res.incumbent,
    )


def recourse_costs(net: Network, first_stage: FirstStage, s: ScenarioSet,
                   backend: str = "highs") -> np.ndarray:
    """Unweighted operating cost of every scenario under a fixed first stage."""
    out = np.zeros(s.n)
    for k in range(s.n):
        one = s.subset([k]).with_weights([1.0])
        inst = build_tep(net, one, first_stage).relaxed()
        res = lp_session(inst, backend).solve()
        if not res.ok:
            raise InfeasibleBounds(f"recourse of scenario {k} is {res.status}")
        out[k] = _operational(net, inst, res.x)[0][0]
    return out


def evaluate_oos(net: Network, first_stage: FirstStage, full: ScenarioSet,
                 backend: str = "highs") -> float:
    """Objective of ``first_stage`` re-evaluated on every scenario of ``full``.

    The recourse splits into one LP per scenario; costs are weight-summed in
    scenario order and added to the investment cost.
    """
    op = recourse_costs(net, first_stage, full, backend)
    return investment_cost(net, first_stage.built, first_stage.capacity) + float(full.weights @ op)


def scenario_context(net: Network, s: ScenarioSet, kind: str = "ss",
                     opts: BnbOptions | None = None) -> np.ndarray:
    """Per-scenario objective values used by problem-based transport costs.

    ``ss``: each scenario solved alone with the full weight.  ``dp``: the
    first stage of the weighted-mean scenario, then each scenario's recourse
    under it, also at full weight.
    """
    opts = opts or BnbOptions()
    W = s.total_weight
    if kind == "ss":
        return np.array([solve_full(net, s.subset([k]).with_weights([W]), opts).objective
                         for k in range(s.n)])
    if kind == "dp":
        mean = ScenarioSet((s.probabilities @ s.profiles)[None, :], [W], s.channel_labels, s.hours)
        fs = solve_full(net, mean, opts).first_stage
        inv = investment_cost(net, fs.built, fs.capacity)
        return inv + W * recourse_costs(net, fs, s)
    raise ValueError(f"unknown context kind {kind!r}; expected 'ss' or 'dp'")


def scale_demand(net: Network, factor: float) -> Network:
    if not factor > 0:
        raise ValueError("demand multiplier must be positive")
    return replace(net, demands=tuple(replace(d, scale=d.scale * factor) for d in net.demands))


def check_flow_physics(net: Network, inst: MilpInstance, xv, tol: float = FLOW_TOL) -> float:
    """Largest violation of the DC flow rules at a solution ``xv``.

    Built lines: ``|f| <= f_max`` and ``f = -b (theta_i - theta_j)``;
    unbuilt candidates carry no flow.
    """
    meta = inst.meta
    fs = _first_stage_from(net, inst, xv)
    th, fl = xv[meta["theta"]], xv[meta["flow"]]
    worst = 0.0
    for li, ln in enumerate(net.lines):
        f = fl[:, li]
        if fs.built[ln.name]:
            i, j = net.bus_index(ln.from_bus), net.bus_index(ln.to_bus)
            b = net.base_mva * ln.susceptance
            worst = max(worst, float(np.abs(f + b * (th[:, i] - th[:, j])).max()),
                        float(np.maximum(np.abs(f) - fs.capacity[ln.name], 0).max()))
        else:
            worst = max(worst, float(np.abs(f).max()))
    return worst


def _clean_slope(g, q):
    # reduced costs carry round-off noise; tiny entries only worsen master scaling
    g = g.copy()
    g[np.abs(g) <= 1e-9 * max(1.0, abs(q), np.abs(g).max(initial=0.0))] = 0.0
    return g


class _DayLp:
    """Single-scenario relaxation whose first-stage columns are re-fixed per call."""

    def __init__(self, net, one: ScenarioSet, backend):
        self.inst = build_tep(net, one).relaxed()
        self.session = lp_session(self.inst, backend)
        self.nz = len(self.inst.meta["x"]) + len(self.inst.meta["fmax"])

    def cut(self, z=None):
        """``(value, slope, x)`` with ``V(z') >= value + slope . (z' - z)``."""
        lb, ub = self.inst.lb.copy(), self.inst.ub.copy()
        if z is not None:
            lb[:self.nz] = ub[:self.nz] = z
        res = self.session.solve(lb, ub)
        if not res.ok:
            raise InfeasibleBounds(f"scenario recourse is {res.status}")
        return res.objective, res.reduced_costs[:self.nz].copy(), res.x


class _Master:
    """Build/capacity master with one cost estimate per scenario and a cut pool."""

    def __init__(self, net, head, nz, nx, weights):
        self.name = f"master_{net.name}"
        self.head, self.nz, self.nx, self.w = head, nz, nx, weights
        win = np.flatnonzero([nm.startswith(("fminx[", "fmaxx[")) for nm in head.row_names])
        self.win = win
        self.A_win = head.A[win][:, :nz].tocoo()
        self.c1 = head.c[:nz].copy()
        self.cuts = [[] for _ in weights]

    def add_cut(self, k, value, slope, z):
        """Record ``V_k(z') >= value + slope . (z' - z)`` for the full scenario LP value ``V_k``."""
        g = _clean_slope(slope - self.c1, value)
        q = value - self.head.offset - self.c1 @ z
        self.cuts[k].append((g, q - g @ z))

    def recourse(self, value, z):
        return value - self.head.offset - self.c1 @ z

    def instance(self, integral: bool) -> MilpInstance:
        head, nz, nx = self.head, self.nz, self.nx
        bld = MilpBuilder(self.name)
        z = np.concatenate([
            bld.add_vars(nx, head.lb[:nx], head.ub[:nx], self.c1[:nx], binary=integral,
                         names=head.var_names[:nx]),
            bld.add_vars(nz - nx, head.lb[nx:nz], head.ub[nx:nz], self.c1[nx:],
                         names=head.var_names[nx:nz])])
        th = bld.add_vars(len(self.w), -np.inf, np.inf, self.w,
                          names=[f"q[{k}]" for k in range(len(self.w))])
        bld.offset = head.offset
        A = self.A_win
        bld.add_rows(A.row, z[A.col], A.data, head.sense[self.win], head.rhs[self.win],
                     [head.row_names[i] for i in self.win])
        rr, cc, vv, rhs, names = [], [], [], [], []
        for k, pool in enumerate(self.cuts):
            for j, (g, q0) in enumerate(pool):
                nzg = np.flatnonzero(g)
                rr.append(np.full(nzg.size + 1, len(rhs)))
                cc.append(np.concatenate([[th[k]], z[nzg]]))
                vv.append(np.concatenate([[1.0], -g[nzg]]))
                rhs.append(q0)
                names.append(f"cut[{k},{j}]")
        bld.add_rows(np.concatenate(rr), np.concatenate(cc), np.concatenate(vv), "G",
                     np.array(rhs), names)
        inst = bld.build()
        inst.meta["theta"] = th
        return inst


def solve_decomposed(net: Network, s: ScenarioSet, opts: BnbOptions | None = None,
                     max_iter: int = 1000) -> TepSolution:
    """Multi-cut L-shaped decomposition of the planning problem.

    The master holds the build and capacity decisions plus one cost estimate
    per scenario; each scenario's recourse LP, solved at the master's plan,
    returns its cost and a subgradient from the reduced costs of the fixed
    first-stage columns.  A warm-up phase iterates on the LP relaxation of the
    master to collect cuts cheaply; the integer phase then runs
    branch-and-bound on the master each round and stops when the best
    evaluated plan is within ``opts.rel_gap`` of the master bound.  ``nodes``
    sums master nodes; ``log`` rows are ``(iteration, bound, incumbent, gap,
    time)``.
    """
    from .milp import relative_gap, solve_lp

    opts = opts or BnbOptions()
    t0 = time.perf_counter()
    days = [_DayLp(net, s.subset([k]).with_weights([1.0]), opts.lp_backend) for k in range(s.n)]
    head = days[0].inst
    nz, nx = days[0].nz, len(head.meta["x"])
    w = s.weights
    master = _Master(net, head, nz, nx, w)
    for k, day in enumerate(days):
        v, d, xk = day.cut()
        master.add_cut(k, v, d, xk[:nz])

    def separate(zh, theta_hat):
        vals, sols, added = np.zeros(s.n), [], 0
        for k, day in enumerate(days):
            v, d, xk = day.cut(zh)
            vals[k] = master.recourse(v, zh)
            sols.append(xk)
            if vals[k] > theta_hat[k] + 1e-7 * max(1.0, abs(vals[k])):
                master.add_cut(k, v, d, zh)
                added += 1
        return vals, sols, added

    lower, nodes, log, traj = -math.inf, 0, [], []
    it = 0
    # warm-up on the relaxed master; its bound is valid for the integer problem too
    while it < max_iter:
        it += 1
        inst = master.instance(integral=False)
        res = solve_lp(inst, opts.lp_backend)
        if not res.ok:
            raise NumericalBreakdown(f"relaxed master is {res.status}")
        lower = max(lower, res.objective)
        zh = res.x[:nz]
        vals, _, added = separate(zh, res.x[inst.meta["theta"]])
        ub_relaxed = float(master.c1 @ zh + head.offset + w @ vals)
        if not added or relative_gap(ub_relaxed, lower) <= opts.rel_gap / 4:
            break

    best = (math.inf, None, None)
    status = "iteration_limit"
    sub_opts = replace(opts, rel_gap=opts.rel_gap / 4, node_limit=None, time_limit=None)
    while it < max_iter:
        it += 1
        inst = master.instance(integral=True)
        res = branch_and_bound(inst, sub_opts)
        nodes += res.nodes
        lower = max(lower, res.bound)
        zh = res.incumbent[:nz].copy()
        zh[:nx] = np.round(zh[:nx])
        vals, sols, added = separate(zh, res.incumbent[inst.meta["theta"]])
        total = float(master.c1 @ zh + head.offset + w @ vals)
        if total < best[0]:
            best = (total, zh, sols)
        gap = relative_gap(best[0], min(lower, best[0]))
        t = time.perf_counter() - t0
        log.append((it, lower, best[0], gap, t))
        traj.append((t, gap))
        if gap <= opts.rel_gap or not added:
            status = "optimal" if gap <= 1e-12 or not added else "gap_reached"
            break
        if opts.time_limit is not None and t >= opts.time_limit:
            status = "time_limit"
            break
    if best[1] is None:
        raise TimeLimit("iteration limit reached before an integer plan was evaluated")
    obj, zh, sols = best
    per_day = [_operational(net, day.inst, xk) for day, xk in zip(days, sols)]
    fs = _first_stage_from(net, head, np.concatenate([zh, np.zeros(head.n_vars - nz)]))
    return TepSolution(
        built=fs.built, capacity=fs.capacity, objective=obj,
        investment_cost=investment_cost(net, fs.built, fs.capacity),
        operational_cost=np.array([op[0] for op, _ in per_day]),
        shed_energy=float(sum(wk * sh for wk, (_, sh) in zip(w, per_day))),
        status=status, gap=relative_gap(obj, min(lower, obj)), nodes=nodes,
        trajectory=traj, log=log, x=None,
    )
