import numpy as np
import pytest

from scenagg.cluster import hac, kmeans
from scenagg.core import Partition, ScenarioSet, make_scenario_set, partition_from_assignment
from scenagg.errors import DegenerateChannel, PreconditionError, ZeroRepresentativeMean
from scenagg.preprocess import NormalizationSpec, normalize, rescale_representatives


def one_channel(values):
    return ScenarioSet(np.asarray(values, float)[:, None], None, ["c"], 1)


def test_zscore_example():
    z, _ = normalize(one_channel([1, 2, 3]), NormalizationSpec("zscore"))
    sd = np.sqrt(2 / 3)
    assert np.allclose(z.profiles[:, 0], [-1 / sd, 0, 1 / sd], atol=1e-12)
    assert np.allclose(z.profiles[:, 0], [-1.2247, 0, 1.2247], atol=1e-4)


def test_minmax_example():
    z, _ = normalize(one_channel([2, 4, 6]), NormalizationSpec("minmax"))
    assert z.profiles[:, 0].tolist() == [0.0, 0.5, 1.0]


def test_maxabs():
    z, _ = normalize(one_channel([-4, 2, 1]), NormalizationSpec("maxabs"))
    assert z.profiles[:, 0].tolist() == [-1.0, 0.5, 0.25]


def test_zscore_fixed_point(rng):
    s = make_scenario_set(rng.normal(size=(20, 6)), labels=["a", "b"], hours=3)
    z1, _ = normalize(s)
    z2, _ = normalize(z1)
    assert np.allclose(z1.profiles, z2.profiles, atol=1e-9)


@pytest.mark.parametrize("method", ["zscore", "minmax", "maxabs"])
@pytest.mark.parametrize("per_channel", [True, False])
def test_round_trip_and_moments(rng, method, per_channel):
    X = rng.normal(size=(30, 8)) * [1, 2, 3, 4, 100, 200, 300, 400] + 50
    s = make_scenario_set(X, labels=["a", "b"], hours=4)
    z, rec = normalize(s, NormalizationSpec(method, per_channel))
    back = rec.inverse(z.profiles)
    assert np.allclose(back, X, rtol=1e-9, atol=0)
    if per_channel:
        for c in range(2):
            block = z.profiles[:, c * 4:(c + 1) * 4]
            if method == "zscore":
                assert abs(block.mean()) <= 1e-9 and abs(block.std() - 1) <= 1e-9
            elif method == "minmax":
                assert block.min() == 0.0 and block.max() == 1.0


@pytest.mark.parametrize("method,values", [("zscore", [3, 3, 3]), ("minmax", [1, 1, 1]),
                                           ("maxabs", [0, 0, 0])])
def test_degenerate_channel(method, values):
    with pytest.raises(DegenerateChannel):
        normalize(one_channel(values), NormalizationSpec(method))


def test_unknown_method():
    with pytest.raises(ValueError):
        NormalizationSpec("robust")


def test_normalization_makes_clustering_unit_free(rng):
    X = rng.normal(size=(40, 6))
    s = make_scenario_set(X, labels=["a", "b"], hours=3)
    scaled = s.with_profiles(X * np.repeat([1000.0, 1.0], 3))
    for algo in (lambda t: kmeans(t, 4, seed=3), lambda t: hac(t, 4, "ward")[0]):
        a = algo(normalize(s)[0]).assignment
        b = algo(normalize(scaled)[0]).assignment
        assert a.tolist() == b.tolist()


def test_rescale_rejects_centroids():
    s = make_scenario_set([[1.0, 1.0], [3.0, 3.0]])
    with pytest.raises(PreconditionError):
        rescale_representatives(partition_from_assignment([0, 1], s), s)


def test_rescale_example():
    # source mean per dim is 2.5; medoids [1,1] and [3,3] with weight 2 each average to 2
    s = ScenarioSet([[1.0, 1.0], [1.0, 1.0], [3.0, 3.0], [5.0, 5.0]], None, ["c"], 2)
    p = Partition(np.array([0, 0, 1, 1]), np.array([[1.0, 1.0], [3.0, 3.0]]), "medoid",
                  np.array([2.0, 2.0]))
    r = rescale_representatives(p, s)
    assert r.meta["rescale_factors"] == [1.25]
    assert np.allclose(r.representatives, [[1.25, 1.25], [3.75, 3.75]])


def test_rescale_singletons_unchanged(rng):
    s = make_scenario_set(rng.uniform(1, 2, size=(5, 4)), labels=["a", "b"], hours=2)
    p = Partition(np.arange(5), s.profiles, "medoid", s.weights)
    r = rescale_representatives(p, s)
    assert np.allclose(r.meta["rescale_factors"], 1.0, atol=1e-12)


def test_rescale_conserves_energy(rng):
    X = rng.uniform(0.2, 1.0, size=(30, 6))
    s = make_scenario_set(X, rng.uniform(0.5, 2, 30), labels=["a", "b"], hours=3)
    p = kmeans(s, 5, seed=1)
    reps = []
    for k in range(p.k):
        mem = p.members(k)
        reps.append(X[mem[0]])
    med = Partition(p.assignment, np.array(reps), "medoid", p.cluster_weights)
    r = rescale_representatives(med, s)
    for c in range(2):
        sl = slice(3 * c, 3 * c + 3)
        lhs = r.cluster_weights @ r.representatives[:, sl].sum(axis=1)
        rhs = s.weights @ X[:, sl].sum(axis=1)
        assert abs(lhs - rhs) <= 1e-9 * abs(rhs)


def test_rescale_zero_representative_mean():
    s = ScenarioSet([[0.0], [2.0]], None, ["c"], 1)
    p = Partition(np.array([0, 0]), np.array([[0.0]]), "medoid", np.array([2.0]))
    with pytest.raises(ZeroRepresentativeMean):
        rescale_representatives(p, s)
