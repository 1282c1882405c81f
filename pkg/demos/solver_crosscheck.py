"""Write the planning MILP to MPS and compare our branch-and-bound with HiGHS on the file.

Run: python demos/solver_crosscheck.py [--days 3]
"""
import argparse
import tempfile
import time
from pathlib import Path

import highspy

from scenagg.io import fixture_path, load_network, load_scenarios
from scenagg.milp import BnbOptions, branch_and_bound, read_mps, write_mps
from scenagg.tep import build_tep


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--days", type=int, default=3)
    args = ap.parse_args()

    s = load_scenarios(fixture_path("synthetic_year.csv")).subset(range(args.days))
    net = load_network(fixture_path("garver6.yaml"), s.channel_labels)
    inst = build_tep(net, s)
    print(f"{inst.n_vars} columns ({inst.binary.sum()} binary), {inst.n_rows} rows")

    t = time.perf_counter()
    ours = branch_and_bound(inst, BnbOptions(rel_gap=0))
    print(f"branch-and-bound: {ours.objective:,.2f} after {ours.nodes} nodes, {time.perf_counter() - t:.1f} s")

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "tep.mps"
        aliases = write_mps(inst, path)
        back = read_mps(path)
        print(f"MPS: {path.stat().st_size:,} bytes, {len(aliases)} aliased names, "
              f"round trip identical: {(back.A != inst.A).nnz == 0 and back.var_names == inst.var_names}")
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("mip_rel_gap", 0.0)
        h.readModel(str(path))
        t = time.perf_counter()
        h.run()
        ref = h.getInfo().objective_function_value
        print(f"HiGHS on the file: {ref:,.2f}, {time.perf_counter() - t:.1f} s")
    print(f"relative difference {abs(ours.objective - ref) / abs(ref):.2e}")


if __name__ == "__main__":
    main()
