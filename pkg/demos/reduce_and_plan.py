"""Reduce a year of daily scenarios, plan on the reduced set, check it on the full set.

Run: python demos/reduce_and_plan.py [--days 60] [--k 6]
"""
import argparse

from scenagg.bench import MethodSpec, reduce_scenarios
from scenagg.io import fixture_path, load_network, load_scenarios
from scenagg.quality import gap_report
from scenagg.tep import evaluate_oos, solve_full

METHODS = ["kmeans/centroid", "kmedoids/medoid", "hac-ward/centroid", "hac-average/medoid", "fsa", "mda"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--days", type=int, default=60)
    ap.add_argument("--k", type=int, default=6)
    args = ap.parse_args()

    year = load_scenarios(fixture_path("synthetic_year.csv")).subset(range(args.days))
    net = load_network(fixture_path("garver6.yaml"), year.channel_labels)
    full = solve_full(net, year, method="auto")
    print(f"full set: {year.n} days, objective {full.objective:,.0f}, built {full.built_lines}")
    print(f"{'method':22s} {'in-sample':>10s} {'OOS gap':>9s}  candidates built")
    for name in METHODS:
        red = reduce_scenarios(MethodSpec.parse(name), year, args.k)
        sol = solve_full(net, red)
        oos = evaluate_oos(net, sol.first_stage, year)
        g = gap_report(full.objective, sol.objective, oos)
        cands = [ln for ln in sol.built_lines if not net.line(ln).existing]
        print(f"{name:22s} {g.in_sample_gap_pct:+9.2f}% {g.oos_gap_pct:+8.2f}%  {cands}")


if __name__ == "__main__":
    main()
