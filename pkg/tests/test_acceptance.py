"""End-to-end acceptance checks; each test prints one PASS/FAIL line."""
import csv
import itertools
import math
import time

import numpy as np
import pytest

from scenagg.bench import BenchOptions, MethodSpec, reduce_scenarios, run_benchmark
from scenagg.cli import main
from scenagg.cluster import LINKAGES, ctpc, hac, kmeans_arrays
from scenagg.core import make_scenario_set
from scenagg.distance import DistanceSpec, distance, dtw, minkowski, sbd
from scenagg.milp import BnbOptions, branch_and_bound, solve_lp
from scenagg.reduce import cost_matrix, forward_selection, forward_selection_order, kantorovich
from scenagg.spatial import jacobi_eigh, laplacian, spectral_partition
from scenagg.tep import build_tep
from test_cluster import brute_agglomerate
from test_reduce import greedy_by_enumeration
from test_spatial import cliques, same_partition

GAP = 1e-3


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.mark.slow
def test_bnb_matches_build_pattern_enumeration(year, garver, criterion):
    with criterion(1, "B&B at zero gap equals 2^9 build-pattern enumeration on Garver, K=3"):
        t0 = time.perf_counter()
        s = reduce_scenarios(MethodSpec("kmeans"), year, 3)
        inst = build_tep(garver, s)
        got = branch_and_bound(inst, BnbOptions(rel_gap=0)).objective
        xs = inst.meta["x"]
        assert xs.size == 9
        best = math.inf
        for pattern in itertools.product((0.0, 1.0), repeat=9):
            lb, ub = inst.lb.copy(), inst.ub.copy()
            lb[xs] = ub[xs] = pattern
            res = solve_lp(inst.with_bounds(lb, ub).relaxed())
            if res.ok:
                best = min(best, res.objective)
        print(f"  B&B {got!r}  enumeration {best!r}")
        assert abs(got - best) <= 1e-6 * abs(best)
        assert time.perf_counter() - t0 < 600


IDENTITY_METHODS = (["kmeans/centroid", "kmedoids/medoid", "ctpc-ward/centroid", "spectral/centroid",
                     "mda", "fsa-dupacova", "fsa-morales", "fsa-bruninx"]
                    + [f"hac-{lk}/medoid" for lk in LINKAGES])


@pytest.mark.slow
def test_identity_reduction_pipeline(year, garver, criterion):
    with criterion(2, "identity reduction K=N=60 gives in-sample and OOS gaps within the MIP gap"):
        t0 = time.perf_counter()
        s = year.subset(range(60))
        r = run_benchmark(garver, s, IDENTITY_METHODS, BenchOptions(k_range=(60,), mip_gap=GAP, repeats=1))
        assert not r.failed, [c.error for c in r.failed]
        for c in r.cells:
            print(f"  {c.method:24s} in-sample {c.in_sample_gap_pct:+.2e} %  OOS {c.oos_gap_pct:+.2e} %")
            assert abs(c.in_sample_gap_pct) <= 100 * GAP
            assert abs(c.oos_gap_pct) <= 100 * GAP
        assert time.perf_counter() - t0 < 1800


@pytest.mark.slow
def test_centroid_reductions_bound_the_full_objective(year, garver, criterion):
    with criterion(3, "k-means and HAC-Ward centroids stay below the full objective for >= 9 of 10 K"):
        r = run_benchmark(garver, year, ["kmeans/centroid", "hac-ward/centroid"],
                          BenchOptions(mip_gap=GAP, timing=False))
        base = r.baseline["objective"]
        print(f"  full-year objective {base:.6g}")
        print(f"  {'K':>3s} {'kmeans rel':>12s} {'hac-ward rel':>12s}")
        table = {}
        for c in r.cells:
            table.setdefault(c.k, {})[c.method] = c.in_sample_objective / base
        for k in sorted(table):
            print(f"  {k:3d} {table[k]['kmeans/centroid']:12.6f} {table[k]['hac-ward/centroid']:12.6f}")
        for method in ("kmeans/centroid", "hac-ward/centroid"):
            below = sum(table[k][method] <= 1 + GAP for k in table)
            assert below >= 9, f"{method}: only {below} of 10 K values at or below the full objective"


def test_fsa_steps_equal_exhaustive_minimization(criterion):
    with criterion(4, "FSA greedy step equals exhaustive minimization, N <= 10, n_keep <= 3"):
        t0 = time.perf_counter()
        rng = np.random.default_rng(4)
        for _ in range(40):
            n = int(rng.integers(1, 11))
            s = make_scenario_set(rng.normal(size=(n, 3)), rng.uniform(0.1, 1, n))
            C = cost_matrix(s)
            for n_keep in range(1, min(3, n) + 1):
                assert forward_selection_order(s, n_keep, C) == greedy_by_enumeration(
                    s.probabilities, C.values, n_keep)
        assert time.perf_counter() - t0 < 1.0


def test_kantorovich_properties(criterion):
    with criterion(5, "Kantorovich: zero self-distance, monotone in the kept set, FSA beats random"):
        rng = np.random.default_rng(5)
        n = 15
        s = make_scenario_set(rng.normal(size=(n, 4)), rng.uniform(0.1, 1, n))
        C = cost_matrix(s)
        assert kantorovich(s, range(n), C) == 0.0
        for _ in range(1000):
            kept = rng.choice(n, int(rng.integers(1, n)), replace=False).tolist()
            extra = int(rng.choice(np.setdiff1d(np.arange(n), kept)))
            assert kantorovich(s, kept + [extra], C) <= kantorovich(s, kept, C)
        wins = 0
        for _ in range(100):
            t = make_scenario_set(rng.normal(size=(20, 4)), rng.uniform(0.1, 1, 20))
            Ct = cost_matrix(t)
            wins += kantorovich(t, forward_selection(t, 4, Ct).kept, Ct) <= kantorovich(
                t, rng.choice(20, 4, replace=False), Ct)
        print(f"  FSA at least as good as a random subset in {wins}/100 trials")
        assert wins >= 95


def test_clustering_oracles(year, criterion):
    with criterion(6, "HAC equals brute force (6 linkages), k-means inertia monotone, CTPC contiguous"):
        t0 = time.perf_counter()
        rng = np.random.default_rng(6)
        for linkage in LINKAGES:
            for n in range(2, 9):
                X = rng.normal(size=(n, 3))
                w = rng.uniform(0.5, 2, n)
                _, dendro = hac(make_scenario_set(X, w), 1, linkage)
                members = {i: {i} for i in range(n)}
                got = []
                for step, (a, b, h, _) in enumerate(dendro.merges):
                    members[n + step] = members[a] | members[b]
                    got.append((frozenset(members[n + step]), h))
                want = brute_agglomerate(linkage, X, w)
                assert [g[0] for g in got] == [m[0] for m in want]
                assert np.allclose([g[1] for g in got], [m[1] for m in want], rtol=1e-12, atol=1e-12)
        X = year.profiles
        for k in range(1, 11):
            for seed in range(3):
                _, _, hist = kmeans_arrays(X, year.weights, k, seed=seed)
                assert all(b <= a for a, b in zip(hist, hist[1:]))
        for linkage in LINKAGES:
            _, dendro = ctpc(year.subset(range(60)), 1, linkage)
            for k in range(1, 61):
                a = dendro.cut(k)
                for c in np.unique(a):
                    ids = np.flatnonzero(a == c)
                    assert ids.max() - ids.min() + 1 == ids.size
        assert time.perf_counter() - t0 < 60


def test_spectral_correctness(criterion):
    with criterion(7, "spectral: exact component recovery, PSD Laplacian, eigen reconstruction"):
        rng = np.random.default_rng(7)
        for _ in range(20):
            sizes = rng.integers(2, 6, size=int(rng.integers(2, 5))).tolist()
            truth = np.repeat(np.arange(len(sizes)), sizes)
            for inner in ("kmeans", "hac"):
                assert same_partition(spectral_partition(cliques(sizes), len(sizes), inner=inner).assignment, truth)
        worst_psd, worst_rec = 0.0, 0.0
        for _ in range(20):
            n = int(rng.integers(3, 25))
            A = rng.uniform(0, 1, (n, n)) * (rng.uniform(size=(n, n)) < 0.5)
            A = np.triu(A, 1)
            A = A + A.T
            for normalized in (False, True):
                if normalized and np.any(A.sum(axis=1) == 0):
                    continue
                L = laplacian(A, normalized).values
                for _ in range(100):
                    x = rng.normal(size=n)
                    worst_psd = max(worst_psd, -float(x @ L @ x))
                vals, V = jacobi_eigh(L)
                worst_rec = max(worst_rec, np.linalg.norm(V @ np.diag(vals) @ V.T - L) / np.linalg.norm(L))
        print(f"  worst negative quadratic form {worst_psd:.2e}, worst reconstruction {worst_rec:.2e}")
        assert worst_psd <= 1e-9
        assert worst_rec <= 1e-8


@pytest.mark.slow
def test_sensitivity_sweep_artifacts(tmp_path, criterion):
    with criterion(8, "demand sweep 60-200 %: nonincreasing gap trajectories, node and gap CSVs"):
        code = main(["sensitivity", "--days", "30", "--solver", "monolithic", "--out", str(tmp_path)])
        assert code == 0
        rows = read_csv(tmp_path / "sensitivity.csv")
        assert [int(r["load_pct"]) for r in rows] == list(range(60, 201, 20))
        for r in rows:
            print(f"  {r['load_pct']:>3s} %  nodes {r['nodes']:>4s}  time {float(r['wall_time_s']):6.1f} s"
                  f"  final gap {float(r['final_gap']):.2e}")
            assert int(r["nodes"]) >= 1 and float(r["final_gap"]) <= GAP
        traj = read_csv(tmp_path / "sensitivity_trajectory.csv")
        for pct in range(60, 201, 20):
            gaps = [float(t["gap"]) for t in traj if int(t["load_pct"]) == pct and t["gap"]]
            times = [float(t["time_s"]) for t in traj if int(t["load_pct"]) == pct and t["gap"]]
            assert gaps, pct
            assert all(b <= a for a, b in zip(gaps, gaps[1:])), pct
            assert all(b >= a for a, b in zip(times, times[1:])), pct
            assert (tmp_path / "logs" / f"sensitivity_{pct}.csv").exists()


def test_distance_suite(criterion):
    with criterion(9, "distance suite: DTW <= Euclidean, SBD scale invariance, axioms"):
        t0 = time.perf_counter()
        rng = np.random.default_rng(9)
        for _ in range(500):
            n = int(rng.integers(1, 40))
            x, y = rng.normal(size=n), rng.normal(size=n)
            assert dtw(x, y) <= minkowski(x, y) + 1e-12
        for _ in range(200):
            x = rng.normal(size=24)
            assert sbd(x, float(rng.uniform(0.01, 100)) * x) == pytest.approx(0, abs=1e-12)
        specs = [DistanceSpec(), DistanceSpec("minkowski", 1), DistanceSpec("minkowski", math.inf),
                 DistanceSpec("dtw"), DistanceSpec("dtw", window=3), DistanceSpec("mjc"), DistanceSpec("sbd")]
        for spec in specs:
            for _ in range(100):
                x, y, z = rng.normal(size=(3, 12))
                d = distance(x, y, spec)
                assert d >= 0
                assert d == pytest.approx(distance(y, x, spec), rel=1e-12, abs=1e-12)
                assert distance(x, x, spec) == pytest.approx(0, abs=1e-12)
                if spec.kind == "minkowski":
                    assert distance(x, z, spec) <= d + distance(y, z, spec) + 1e-12
        assert time.perf_counter() - t0 < 10


@pytest.mark.slow
def test_bench_reports_are_byte_identical(tmp_path, criterion):
    with criterion(10, "two identical bench runs write byte-identical report.json"):
        cfg = tmp_path / "bench.yaml"
        cfg.write_text("days: 10\nmethods: default\nk_range: 1..4\nrepeats: 1\nseed: 3\nmip_gap: 0.001\n")
        outputs = []
        for run in ("a", "b"):
            assert main(["bench", "--config", str(cfg), "--out", str(tmp_path / run)]) == 0
            outputs.append((tmp_path / run / "report.json").read_bytes())
        assert outputs[0] == outputs[1]
