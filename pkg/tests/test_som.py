import itertools

import numpy as np
import pytest

from scenagg.core import ScenarioSet, make_scenario_set
from scenagg.errors import BadGrid, BadSchedule, DimensionMismatch
from scenagg.som import SomGrid, som, som_bmu, som_partition, som_train


def test_single_node_single_sample_full_step():
    s = make_scenario_set([[2.0, -1.0, 4.0]])
    g = som_train(s, 1, 1, epochs=1, lr0=1.0, lr_decay=False, seed=3)
    assert g.weights[0].tolist() == [2.0, -1.0, 4.0]


def test_zero_radius_moves_only_bmu():
    s = make_scenario_set([[0.0, 0.0], [1.0, 1.0]])
    init = som_train(s, 3, 3, epochs=1, lr0=1e-300, radius0=0.0, seed=4).weights
    g = som_train(s, 3, 3, epochs=1, lr0=0.5, radius0=0.0, seed=4)
    moved = np.flatnonzero(np.any(np.abs(g.weights - init) > 1e-12, axis=1))
    bmus = {som_bmu(SomGrid(3, 3, init), x) for x in s.profiles}
    assert 1 <= moved.size <= 2
    assert set(moved.tolist()) <= bmus | {som_bmu(g, x) for x in s.profiles}
    wide = som_train(s, 3, 3, epochs=1, lr0=0.5, radius0=2.0, seed=4)
    assert np.all(np.any(np.abs(wide.weights - init) > 1e-12, axis=1))


def test_single_node_converges_to_mean(rng):
    X = rng.normal(loc=5.0, size=(40, 3))
    s = make_scenario_set(X)
    g = som_train(s, 1, 1, epochs=50, lr0=0.5, seed=0)
    mean = X.mean(axis=0)
    assert np.all(np.abs(g.weights[0] - mean) <= 1e-2 * np.abs(mean))


def test_bmu_examples():
    g = SomGrid(1, 2, np.array([[0.0], [10.0]]))
    assert som_bmu(g, [3.0]) == 0
    assert som_bmu(g, [10.0]) == 1
    assert som_bmu(g, [5.0]) == 0
    with pytest.raises(DimensionMismatch):
        som_bmu(g, [1.0, 2.0])


def test_grid_and_schedule_errors():
    s = make_scenario_set(np.eye(2))
    with pytest.raises(BadGrid):
        som_train(s, 0, 2)
    with pytest.raises(BadSchedule):
        som_train(s, 1, 2, epochs=0)
    with pytest.raises(BadSchedule):
        som_train(s, 1, 2, lr0=1.5)
    with pytest.raises(BadSchedule):
        som_train(s, 1, 2, radius0=-1)
    with pytest.raises(BadGrid):
        SomGrid(1, 2, np.zeros((3, 1)))


def test_partition_identical_scenarios():
    s = make_scenario_set(np.ones((5, 2)))
    p = som_partition(som_train(s, 2, 2, seed=1), s)
    assert p.k == 1 and p.cluster_weights.tolist() == [5.0]


def test_partition_nodes_on_scenarios(rng):
    X = rng.normal(size=(4, 3))
    s = make_scenario_set(X)
    p = som_partition(SomGrid(2, 2, X[::-1].copy()), s)
    assert p.k == 4
    assert sorted(p.assignment.tolist()) == [0, 1, 2, 3]


def test_two_blobs_match_exhaustive(rng):
    X = np.vstack([rng.normal(size=(5, 2)), rng.normal(size=(5, 2)) + [50, 50]])
    s = make_scenario_set(X)

    def sse(a):
        return sum(((X[a == c] - X[a == c].mean(axis=0)) ** 2).sum() for c in (0, 1))

    best = min(((0,) + b for b in itertools.product((0, 1), repeat=9) if 1 in b),
               key=lambda a: sse(np.array(a)))
    p = som(s, 2, seed=7)
    assert p.assignment.tolist() == list(best)


def test_weights_stay_in_hull(rng):
    X = rng.uniform(-1, 1, size=(30, 4))
    s = make_scenario_set(X)
    g = som_train(s, 3, 3, epochs=20, seed=2)
    assert np.all(g.weights >= X.min(axis=0) - 1e-12)
    assert np.all(g.weights <= X.max(axis=0) + 1e-12)


def test_deterministic(rng):
    s = make_scenario_set(rng.normal(size=(25, 3)))
    a, b = som_train(s, 2, 3, seed=11), som_train(s, 2, 3, seed=11)
    assert np.array_equal(a.weights, b.weights)
