import itertools
import math
from dataclasses import replace

import numpy as np
import pytest

from scenagg.core import ScenarioSet
from scenagg.errors import InfeasibleBounds, UnboundChannel
from scenagg.milp import BnbOptions, solve_lp
from scenagg.network import Demand, Generator, Line, Network
from scenagg.tep import (FirstStage, build_tep, check_flow_physics, evaluate_oos, investment_cost,
                         scale_demand, scenario_context, solve_decomposed, solve_full)

EXACT = BnbOptions(rel_gap=0)


def two_bus(candidate=False, shed_cost=10_000.0):
    lines = [Line("old", "1", "2", 1.0, 100.0, 100.0, existing=True, base_capacity=100.0)]
    if candidate:
        # half the susceptance: the candidate carries half of what the old line carries
        lines.append(Line("new", "1", "2", 0.5, 200.0, 10.0, cost_fixed=1000.0, cost_variable=1.0))
    return Network(["1", "2"], lines, [Generator("g", "1", 1000.0, 10.0)],
                   demands=[Demand("d", "2", "load")], shed_cost=shed_cost)


def flat(mw, hours=1, weights=None):
    mw = np.atleast_1d(np.asarray(mw, float))
    return ScenarioSet(np.repeat(mw[:, None], hours, axis=1), weights, ["load"], hours)


def test_dispatch_only():
    sol = solve_full(two_bus(), flat(50))
    assert sol.objective == pytest.approx(500)
    assert sol.investment_cost == 0 and sol.shed_energy == pytest.approx(0)


def test_build_versus_shed():
    # build: 1000 + 50 * 1 + 150 * 10 = 2550; shedding 50 MW would cost 500,000
    sol = solve_full(two_bus(True), flat(150), EXACT)
    assert sol.objective == pytest.approx(2550)
    assert sol.built["new"] and sol.capacity["new"] == pytest.approx(50)
    assert sol.built_lines == ["new", "old"]


def test_zero_demand():
    sol = solve_full(two_bus(True), flat(0), EXACT)
    assert sol.objective == pytest.approx(0, abs=1e-9)
    assert not sol.built["new"] and sol.capacity["new"] == 0
    assert np.allclose(sol.operational_cost, 0)


def test_undersized_candidate_out_of_sample():
    # capacity 10 on the half-susceptance candidate caps the old line at 20 MW:
    # 30 MW served, 120 MW shed -> 1000 + 10 + 30 * 10 + 120 * 10000
    fs = FirstStage({"old": True, "new": True}, {"old": 100.0, "new": 10.0})
    assert evaluate_oos(two_bus(True), fs, flat(150)) == pytest.approx(1_201_310)


def test_zero_capacity_candidate_zero_demand():
    net = replace(two_bus(True), lines=(two_bus(True).lines[0], replace(two_bus(True).lines[1], f_min=0.0)))
    fs = FirstStage({"old": True, "new": True}, {"old": 100.0, "new": 0.0})
    assert evaluate_oos(net, fs, flat(0)) == pytest.approx(1000)


def test_out_of_sample_of_optimum_is_the_optimum(garver, year):
    s = year.subset(range(3))
    sol = solve_full(garver, s)
    oos = evaluate_oos(garver, sol.first_stage, s)
    assert oos == pytest.approx(sol.objective, rel=1e-6)


def test_first_stage_bounds_checked():
    fs = FirstStage({"old": True, "new": True}, {"old": 100.0, "new": 500.0})
    with pytest.raises(InfeasibleBounds):
        evaluate_oos(two_bus(True), fs, flat(150))


def test_unbound_channel():
    s = ScenarioSet(np.ones((1, 1)), None, ["wind"], 1)
    with pytest.raises(UnboundChannel):
        build_tep(two_bus(), s)


def test_row_counts(garver, year):
    s = year.subset(range(2))
    inst = build_tep(garver, s)
    rows = inst.row_names
    T, K, nb, L = 24, 2, len(garver.buses), len(garver.lines)
    assert sum(r.startswith("bal[") for r in rows) == nb * T * K
    assert sum(r.startswith(("fdu[", "fdl[")) for r in rows) == 2 * L * T * K
    assert sum(r.startswith("ru[") for r in rows) == len(garver.generators) * (T - 1) * K


def three_bus():
    lines = [Line("a", "1", "2", 1.0, 60.0, 60.0, existing=True, base_capacity=60.0),
             Line("b", "2", "3", 1.0, 60.0, 60.0, existing=True, base_capacity=60.0),
             Line("c1", "1", "3", 0.8, 150.0, 20.0, cost_fixed=900.0, cost_variable=2.0),
             Line("c2", "1", "2", 1.2, 150.0, 20.0, cost_fixed=700.0, cost_variable=1.5)]
    return Network(["1", "2", "3"], lines, [Generator("g", "1", 500.0, 5.0, 40.0, -40.0)],
                   demands=[Demand("d2", "2", "load", 0.4), Demand("d3", "3", "load", 0.6)],
                   shed_cost=300.0)


def test_matches_build_pattern_enumeration():
    net = three_bus()
    s = ScenarioSet(np.array([[80.0, 140.0, 200.0], [60.0, 100.0, 90.0]]), [2.0, 1.0], ["load"], 3)
    sol = solve_full(net, s, EXACT)
    inst = build_tep(net, s)
    best = math.inf
    for pattern in itertools.product((0.0, 1.0), repeat=2):
        lb, ub = inst.lb.copy(), inst.ub.copy()
        lb[inst.meta["x"]] = ub[inst.meta["x"]] = pattern
        res = solve_lp(inst.with_bounds(lb, ub).relaxed())
        if res.ok:
            best = min(best, res.objective)
    assert sol.objective == pytest.approx(best, rel=1e-9)


def test_flow_physics(garver, year):
    s = year.subset(range(2))
    sol = solve_full(garver, s)
    inst = build_tep(garver, s)
    assert check_flow_physics(garver, inst, sol.x) <= 1e-6
    for ln in garver.lines:
        if not sol.built[ln.name]:
            assert sol.capacity[ln.name] == 0
        elif not ln.existing:
            assert ln.f_min - 1e-6 <= sol.capacity[ln.name] <= ln.f_max + 1e-6
        else:
            assert ln.base_capacity - 1e-6 <= sol.capacity[ln.name] <= ln.f_max + 1e-6


def test_weight_linearity():
    net = three_bus()
    s = ScenarioSet(np.array([[80.0, 140.0, 200.0], [60.0, 100.0, 90.0]]), [2.0, 1.0], ["load"], 3)
    a = solve_full(net, s, EXACT)
    doubled_costs = replace(net, lines=tuple(replace(ln, cost_fixed=2 * ln.cost_fixed,
                                                     cost_variable=2 * ln.cost_variable)
                                             for ln in net.lines))
    b = solve_full(doubled_costs, s.with_weights(2 * s.weights), EXACT)
    assert b.objective == pytest.approx(2 * a.objective, rel=1e-9)
    assert a.built == b.built
    assert all(a.capacity[k] == pytest.approx(b.capacity[k], abs=1e-6) for k in a.capacity)
    assert (b.objective - b.investment_cost) == pytest.approx(2 * (a.objective - a.investment_cost), rel=1e-9)


def test_scenario_order_does_not_change_objective(garver, year):
    s = year.subset(range(3))
    a = solve_full(garver, s, EXACT)
    b = solve_full(garver, s.subset([2, 0, 1]), EXACT)
    assert b.objective == pytest.approx(a.objective, rel=1e-9)


def test_investment_cost_counts_only_added_capacity():
    net = three_bus()
    built = {"a": True, "b": True, "c1": False, "c2": True}
    cap = {"a": 60.0, "b": 60.0, "c1": 0.0, "c2": 30.0}
    assert investment_cost(net, built, cap) == pytest.approx(700 + 1.5 * 30)


def test_decomposition_agrees_with_extensive_form(garver, year):
    s = year.subset(range(6))
    mono = solve_full(garver, s, BnbOptions(rel_gap=1e-4))
    dec = solve_decomposed(garver, s, BnbOptions(rel_gap=1e-4))
    assert dec.objective == pytest.approx(mono.objective, rel=2e-4)
    assert evaluate_oos(garver, dec.first_stage, s) == pytest.approx(dec.objective, rel=1e-6)
    gaps = [row[3] for row in dec.log]
    assert gaps[-1] <= 1e-4
    assert solve_full(garver, s, BnbOptions(rel_gap=1e-4), method="auto").objective == pytest.approx(
        mono.objective, rel=2e-4)


def test_scenario_context():
    net = two_bus(True)
    same = flat([120, 120, 120])
    for kind in ("ss", "dp"):
        z = scenario_context(net, same, kind, EXACT)
        assert np.allclose(z, z[0])
    z = scenario_context(net, flat([60, 130, 90]), "ss", EXACT)
    assert z[0] <= z[2] <= z[1]
    s = flat([60, 130, 90], weights=[1, 2, 3])
    manual = [solve_full(net, flat(v, weights=[6.0]), EXACT).objective for v in (60, 130, 90)]
    assert scenario_context(net, s, "ss", EXACT) == pytest.approx(manual, rel=1e-12)


def test_dp_context_uses_mean_first_stage():
    net = two_bus(True)
    s = flat([60, 140], weights=[1, 1])
    fs = solve_full(net, flat(100, weights=[2.0]), EXACT).first_stage
    manual = [evaluate_oos(net, fs, flat(v, weights=[2.0])) for v in (60, 140)]
    assert scenario_context(net, s, "dp", EXACT) == pytest.approx(manual, rel=1e-12)


def test_scale_demand():
    net = scale_demand(two_bus(), 0.5)
    assert solve_full(net, flat(100)).objective == pytest.approx(500)
    with pytest.raises(ValueError):
        scale_demand(two_bus(), 0)
