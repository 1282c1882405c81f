import itertools
import math

import numpy as np
import pytest

from scenagg.errors import Infeasible, NodeLimit
from scenagg.milp.bnb import BnbOptions, branch_and_bound, relative_gap
from scenagg.milp.lp import lp_session, solve_lp
from scenagg.milp.model import MilpBuilder, MilpInstance
from scenagg.milp.simplex import simplex_solve


def instance(c, A, sense, rhs, lb=None, ub=None, binary=None):
    A = np.atleast_2d(np.asarray(A, float))
    m, n = A.shape
    return MilpInstance(A=A, sense=np.asarray(sense), rhs=rhs, c=c,
                        lb=np.zeros(n) if lb is None else lb,
                        ub=np.full(n, np.inf) if ub is None else ub,
                        binary=np.zeros(n, bool) if binary is None else binary,
                        var_names=[f"v{j}" for j in range(n)], row_names=[f"r{i}" for i in range(m)])


def vertex_enumeration(c, A, rhs):
    """min c.x over {A x <= rhs, x >= 0} by trying every set of n active constraints."""
    m, n = A.shape
    G = np.vstack([A, -np.eye(n)])
    h = np.concatenate([rhs, np.zeros(n)])
    best = math.inf
    for act in itertools.combinations(range(m + n), n):
        Ga = G[list(act)]
        if abs(np.linalg.det(Ga)) < 1e-12:
            continue
        x = np.linalg.solve(Ga, h[list(act)])
        if np.all(G @ x <= h + 1e-9):
            best = min(best, float(c @ x))
    return best


def test_single_variable_examples():
    res = simplex_solve([1.0], [[1.0], [1.0]], ["G", "L"], [3, 10], [-np.inf], [np.inf])
    assert res.status == "optimal" and res.objective == pytest.approx(3) and res.x[0] == pytest.approx(3)
    assert simplex_solve([1.0], [[1.0], [1.0]], ["L", "G"], [1, 2], [-np.inf], [np.inf]).status == "infeasible"
    assert simplex_solve([-1.0], [[1.0]], ["G"], [0], [0], [np.inf]).status == "unbounded"


def test_three_variable_vertex():
    # max 2x + 3y + z/2  s.t.  x + y + z <= 4,  x + 2y <= 5,  y <= 2
    c = np.array([-2.0, -3.0, -0.5])
    A = np.array([[1.0, 1, 1], [1, 2, 0], [0, 1, 0]])
    rhs = np.array([4.0, 5, 2])
    res = simplex_solve(c, A, ["L"] * 3, rhs, np.zeros(3), np.full(3, np.inf))
    # vertex x=3, y=1, z=0: 6 + 3 = 9
    assert res.objective == pytest.approx(-9)
    assert res.x == pytest.approx([3, 1, 0])
    assert vertex_enumeration(c, A, rhs) == pytest.approx(-9)


@pytest.mark.parametrize("trial", range(25))
def test_simplex_against_vertex_enumeration(rng, trial):
    m, n = int(rng.integers(2, 5)), int(rng.integers(2, 5))
    A = rng.uniform(0.1, 2, (m, n))
    rhs = rng.uniform(1, 5, m)
    c = rng.normal(size=n)
    res = simplex_solve(c, A, ["L"] * m, rhs, np.zeros(n), np.full(n, np.inf))
    assert res.objective == pytest.approx(vertex_enumeration(c, A, rhs), abs=1e-9)


def mixed_lp(rng, m=8, n=10):
    A = rng.normal(size=(m, n))
    x0 = rng.uniform(0, 1, n)
    act = A @ x0
    sense = rng.choice(["L", "G", "E"], m)
    rhs = np.where(sense == "L", act + rng.uniform(0, 1, m), np.where(sense == "G", act - rng.uniform(0, 1, m), act))
    lb = np.where(rng.uniform(size=n) < 0.2, -np.inf, -rng.uniform(0, 1, n))
    ub = np.where(rng.uniform(size=n) < 0.2, np.inf, 1 + rng.uniform(0, 1, n))
    return instance(rng.normal(size=n), A, sense, rhs, lb, ub)


def dual_objective(inst, res):
    rc = res.reduced_costs
    val = float(res.duals @ inst.rhs) + inst.offset
    for j in range(inst.n_vars):
        if rc[j] > 1e-9:
            val += rc[j] * inst.lb[j]
        elif rc[j] < -1e-9:
            val += rc[j] * inst.ub[j]
    return val


@pytest.mark.parametrize("trial", range(20))
def test_backends_agree_and_weak_duality(rng, trial):
    inst = mixed_lp(rng)
    a = solve_lp(inst, "simplex")
    b = solve_lp(inst, "highs")
    assert a.status == b.status
    if a.ok:
        scale = max(1.0, abs(b.objective))
        assert a.objective == pytest.approx(b.objective, abs=1e-7 * scale)
        assert inst.violation(a.x) <= 1e-7 * scale
        for res in (a, b):
            assert dual_objective(inst, res) <= res.objective + 1e-6 * scale
            assert dual_objective(inst, res) == pytest.approx(res.objective, abs=1e-6 * scale)


def test_highs_session_warm_resolves(rng):
    inst = mixed_lp(rng)
    s = lp_session(inst, "highs")
    first = s.solve()
    lb = inst.lb.copy()
    lb[0] = max(lb[0], 0.5) if math.isfinite(inst.ub[0]) and inst.ub[0] >= 0.5 else lb[0]
    s.solve(lb, inst.ub)
    again = s.solve()
    assert again.objective == pytest.approx(first.objective, abs=1e-9)
    assert s.solve(inst.ub + 1, inst.ub).status == "infeasible"


def test_knapsack():
    inst = instance([-3.0, -2.0], [[1.0, 1.0]], ["L"], [1.0], ub=np.ones(2), binary=np.ones(2, bool))
    r = branch_and_bound(inst, BnbOptions(rel_gap=0))
    assert r.objective == pytest.approx(-3) and r.incumbent.tolist() == [1, 0]


def test_integral_root_needs_no_branching():
    inst = instance([1.0, 2.0], [[1.0, 1.0]], ["G"], [1.0], ub=np.ones(2), binary=np.ones(2, bool))
    r = branch_and_bound(inst, BnbOptions(rel_gap=0))
    assert r.branched == 0 and r.gap == 0 and r.objective == pytest.approx(1)


def facility(rng, n_fac, n_cli):
    b = MilpBuilder("facility")
    y = b.add_vars(n_fac, ub=1.0, cost=rng.uniform(5, 20, n_fac), binary=True,
                   names=[f"y{i}" for i in range(n_fac)])
    x = b.add_vars(n_fac * n_cli, cost=rng.uniform(1, 10, n_fac * n_cli),
                   names=[f"x{i}_{j}" for i in range(n_fac) for j in range(n_cli)])
    demand = rng.uniform(1, 4, n_cli)
    cap = rng.uniform(3, 8, n_fac)
    X = x.reshape(n_fac, n_cli)
    b.add_rows(np.repeat(np.arange(n_cli), n_fac), X.T.ravel(), np.ones(n_fac * n_cli), "G", demand,
               [f"d{j}" for j in range(n_cli)])
    rows, cols, vals = [], [], []
    for i in range(n_fac):
        rows += [i] * (n_cli + 1)
        cols += X[i].tolist() + [int(y[i])]
        vals += [1.0] * n_cli + [-cap[i]]
    b.add_rows(rows, cols, vals, "L", 0.0, [f"c{i}" for i in range(n_fac)])
    return b.build()


def enumerate_binaries(inst):
    best = math.inf
    bins = inst.binaries
    for pattern in itertools.product((0.0, 1.0), repeat=bins.size):
        lb, ub = inst.lb.copy(), inst.ub.copy()
        lb[bins] = ub[bins] = pattern
        res = solve_lp(inst.with_bounds(lb, ub).relaxed())
        if res.ok:
            best = min(best, res.objective)
    return best


@pytest.mark.parametrize("trial", range(8))
@pytest.mark.parametrize("backend", ["highs", "simplex"])
def test_bnb_matches_enumeration(rng, trial, backend):
    n_fac = int(rng.integers(3, 9 if backend == "highs" else 6))
    inst = facility(rng, n_fac, 4)
    r = branch_and_bound(inst, BnbOptions(rel_gap=0, lp_backend=backend))
    want = enumerate_binaries(inst)
    assert r.objective == pytest.approx(want, rel=1e-9)
    assert inst.violation(r.incumbent) <= 1e-6
    ints = r.incumbent[inst.binaries]
    assert np.all(np.abs(ints - np.round(ints)) <= 1e-6)


def test_bound_monotone_and_gap_nonincreasing(rng):
    inst = facility(rng, 10, 6)
    r = branch_and_bound(inst, BnbOptions(rel_gap=0, heuristic_every=0))
    bounds = [row[1] for row in r.log]
    assert all(b2 >= b1 - 1e-9 for b1, b2 in zip(bounds, bounds[1:]))
    gaps = [g for _, g in r.trajectory]
    assert all(g2 <= g1 + 1e-12 for g1, g2 in zip(gaps, gaps[1:]))
    assert r.status == "optimal" and r.gap == 0


def test_gap_option_is_respected(rng):
    inst = facility(rng, 10, 6)
    exact = branch_and_bound(inst, BnbOptions(rel_gap=0)).objective
    loose = branch_and_bound(inst, BnbOptions(rel_gap=0.05))
    assert loose.gap <= 0.05
    assert exact <= loose.objective <= exact * 1.05 + 1e-9


def test_node_limit(rng):
    inst = facility(rng, 10, 6)
    try:
        r = branch_and_bound(inst, BnbOptions(rel_gap=0, node_limit=1, heuristic_every=0))
    except NodeLimit:
        return
    assert r.status in ("node_limit", "optimal")


def test_infeasible_milp():
    inst = instance([1.0, 1.0], [[1.0, 1.0]], ["E"], [1.5], ub=np.ones(2), binary=np.ones(2, bool))
    with pytest.raises(Infeasible):
        branch_and_bound(inst)


def test_relative_gap():
    assert relative_gap(100, 99.9) == pytest.approx(1e-3)
    assert relative_gap(math.inf, 0) == math.inf
    assert relative_gap(5, 6) == 0


def test_instance_validation():
    bad = instance([1.0], [[1.0]], ["L"], [1.0], ub=[2.0], binary=np.ones(1, bool))
    with pytest.raises(ValueError):
        bad.validate()
    with pytest.raises(ValueError):
        instance([np.nan], [[1.0]], ["L"], [1.0]).validate()
    with pytest.raises(ValueError):
        BnbOptions(rel_gap=-1)
