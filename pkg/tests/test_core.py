import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scenagg.cluster import kmeans
from scenagg.core import (Partition, ScenarioSet, disaggregate, make_scenario_set,
                          partition_from_assignment, reduced_from_partition)
from scenagg.errors import MismatchedSource, NegativeWeight, NonFiniteValue, PreconditionError, RaggedInput


def test_uniform_default_weights():
    s = make_scenario_set(np.zeros((365, 48)), [], ["a", "b"])
    assert s.n == 365 and s.hours == 24 and s.channels == 2
    assert np.allclose(s.probabilities, 1 / 365)
    assert abs(s.probabilities.sum() - 1) <= 1e-12


def test_probabilities_from_weights():
    s = make_scenario_set(np.eye(3), [2, 1, 1])
    assert s.probabilities.tolist() == [0.5, 0.25, 0.25]


def test_nan_row_rejected():
    X = np.ones((3, 4))
    X[1, 2] = np.nan
    with pytest.raises(NonFiniteValue):
        make_scenario_set(X)


def test_ragged_and_negative_inputs():
    with pytest.raises(RaggedInput):
        make_scenario_set([[1.0, 2.0], [3.0]])
    with pytest.raises(RaggedInput):
        make_scenario_set(np.ones((3, 4)), [1, 1])
    with pytest.raises(NegativeWeight):
        make_scenario_set(np.ones((2, 4)), [1, -1])
    with pytest.raises(NegativeWeight):
        make_scenario_set(np.ones((2, 4)), [0, 0])


def test_scenario_feature_layout():
    s = ScenarioSet(np.arange(12.0).reshape(2, 6), None, ["a", "b", "c"], 2)
    sc = s[1]
    assert sc.features.size == sc.hours * sc.channels
    assert s.channel("b").tolist() == [[2, 3], [8, 9]]
    assert s.cube().shape == (2, 3, 2)


def test_scenario_set_is_immutable():
    s = make_scenario_set(np.ones((2, 3)))
    with pytest.raises(ValueError):
        s.profiles[0, 0] = 5


def test_disaggregate_examples():
    s = make_scenario_set(np.arange(8.0).reshape(4, 2))
    p = partition_from_assignment([0, 0, 1, 1], s)
    assert disaggregate(p, s) == {0: [0, 1], 1: [2, 3]}
    single = partition_from_assignment(np.arange(4), s)
    assert disaggregate(single, s) == {k: [k] for k in range(4)}
    one = partition_from_assignment(np.zeros(4, int), s)
    assert disaggregate(one, s) == {0: [0, 1, 2, 3]}


def test_disaggregate_rejects_other_source():
    s = make_scenario_set(np.arange(8.0).reshape(4, 2))
    other = make_scenario_set(np.arange(8.0).reshape(4, 2) + 1)
    p = partition_from_assignment([0, 0, 1, 1], s)
    with pytest.raises(MismatchedSource):
        disaggregate(p, other)
    with pytest.raises(MismatchedSource):
        disaggregate(p, make_scenario_set(np.ones((3, 2))))


def test_partition_invariants_enforced():
    with pytest.raises(PreconditionError):
        Partition(np.array([0, 2]), np.ones((3, 1)), "centroid", np.ones(3))
    with pytest.raises(PreconditionError):
        Partition(np.array([0, 0]), np.ones((1, 1)), "mean", np.ones(1))


def test_centroid_weights_and_means():
    s = make_scenario_set([[0.0, 0.0], [2.0, 2.0], [10.0, 0.0]], [1, 3, 2])
    p = partition_from_assignment([0, 0, 1], s)
    assert p.cluster_weights.tolist() == [4.0, 2.0]
    assert np.allclose(p.representatives[0], [1.5, 1.5])


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 12), st.integers(1, 5), st.integers(0, 10_000))
def test_partition_coverage_and_mass(n, k, seed):
    k = min(k, n)
    rng = np.random.default_rng(seed)
    s = make_scenario_set(rng.normal(size=(n, 3)), rng.uniform(0.1, 2, n))
    p = kmeans(s, k, seed=seed)
    groups = disaggregate(p, s)
    ids = sorted(i for g in groups.values() for i in g)
    assert ids == list(range(n))
    assert abs(p.cluster_weights.sum() - s.total_weight) <= 1e-9 * s.total_weight
    r = reduced_from_partition(p, s, "kmeans", {"k": k}, seed)
    assert abs(r.scenarios.probabilities.sum() - 1) <= 1e-12


def test_reduced_fingerprint_tracks_provenance():
    s = make_scenario_set(np.arange(12.0).reshape(6, 2))
    p = partition_from_assignment([0, 0, 1, 1, 2, 2], s)
    base = reduced_from_partition(p, s, "kmeans", {"k": 3}, 0)
    same = reduced_from_partition(p, s, "kmeans", {"k": 3}, 0)
    assert base.fingerprint == same.fingerprint
    variants = [
        reduced_from_partition(p, s, "hac", {"k": 3}, 0),
        reduced_from_partition(p, s, "kmeans", {"k": 4}, 0),
        reduced_from_partition(p, s, "kmeans", {"k": 3}, 1),
    ]
    s2 = make_scenario_set(np.arange(12.0).reshape(6, 2) * 2)
    variants.append(reduced_from_partition(partition_from_assignment([0, 0, 1, 1, 2, 2], s2),
                                           s2, "kmeans", {"k": 3}, 0))
    assert len({v.fingerprint for v in variants} | {base.fingerprint}) == 5
