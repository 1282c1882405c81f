"""Group network buses by spectral clustering, per day and by consensus over days.

Run: python demos/bus_clusters.py [--days 30] [--k 3]
"""
import argparse

import numpy as np

from scenagg.io import fixture_path, load_network, load_scenarios
from scenagg.spatial import consensus_matrix, consensus_partition, similarity, spectral_partition
from scenagg.tep import solve_full


def nodal_profiles(net, day):
    """Hourly net injection (renewable availability minus demand) of every bus."""
    P = np.zeros((len(net.buses), day.hours))
    for d in net.demands:
        P[net.bus_index(d.bus)] -= d.scale * day.channel(d.channel)[0]
    for r in net.renewables:
        P[net.bus_index(r.bus)] += r.capacity * day.channel(r.channel)[0]
    return P


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--days", type=int, default=30)
    ap.add_argument("--k", type=int, default=3)
    args = ap.parse_args()

    year = load_scenarios(fixture_path("synthetic_year.csv")).subset(range(args.days))
    net = load_network(fixture_path("garver6.yaml"), year.channel_labels)
    # bus 6 is unconnected before expansion, so group the planned network
    plan = solve_full(net, year.subset(range(min(5, args.days))))
    lines = [ln for ln in net.lines if plan.built[ln.name]]

    for kind in ("topology", "admittance"):
        A = similarity(net, kind=kind, lines=lines)
        p = spectral_partition(A, args.k)
        print(f"{kind:11s} groups: {groups(net, p.assignment)}")

    daily = []
    for d in range(year.n):
        A = similarity(net, kind="timeseries", lines=lines, profiles=nodal_profiles(net, year.subset([d])))
        daily.append(spectral_partition(A, args.k, seed=d))
    M = consensus_matrix(daily)
    print("consensus matrix (share of days two buses share a group):")
    for b, row in zip(net.buses, M):
        print(f"  bus {b}: " + " ".join(f"{v:4.2f}" for v in row))
    p = consensus_partition(daily, args.k)
    print(f"consensus groups: {groups(net, p.assignment)}")


def groups(net, assignment):
    return [[net.buses[i] for i in np.flatnonzero(assignment == c)] for c in np.unique(assignment)]


if __name__ == "__main__":
    main()
