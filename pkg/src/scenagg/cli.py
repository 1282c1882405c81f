"""Command line entry point: ``scenagg {solve,reduce,bench,sensitivity,export-mps}``.

Settings come from an optional YAML file (``--config``) whose keys mirror the
long flag names with underscores; flags given on the command line win.
Exit codes: 0 success, 1 configuration or input error, 2 failed cells.
"""
from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from pathlib import Path

import yaml

from . import io
from .bench import (DEFAULT_LEVELS, DEFAULT_METHODS, BenchOptions, MethodSpec, SensitivityReport,
                    reduce_scenarios, run_benchmark, run_sensitivity)
from .errors import ScenaggError
from .milp import BnbOptions, write_mps
from .tep import SOLVE_METHODS, build_tep, solve_full

log = logging.getLogger("scenagg")

EXIT_OK, EXIT_CONFIG, EXIT_FAILED = 0, 1, 2

CONFIG_KEYS = {
    "network", "scenarios", "days", "methods", "method", "k", "k_range", "mip_gap", "seed",
    "out", "repeats", "load_levels", "solver", "oos", "normalization", "rescale", "lp_backend",
    "time_limit",
}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def parse_k_range(text) -> list[int]:
    """``"A..B"`` (inclusive), ``"A,B,C"`` or a list of ints."""
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    text = str(text).strip()
    m = re.fullmatch(r"(\d+)\s*\.\.\s*(\d+)", text)
    if m:
        a, b = int(m.group(1)), int(m.group(2))
        if a > b:
            raise ConfigError(f"empty K range {text!r}")
        return list(range(a, b + 1))
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse K range {text!r}; use A..B or a comma list") from None


def parse_levels(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse load levels {text!r}") from None


def parse_methods(text) -> list[MethodSpec]:
    if text is None:
        return list(DEFAULT_METHODS)
    items = text if isinstance(text, (list, tuple)) else str(text).split(",")
    out = []
    for item in items:
        if str(item).strip() == "default":
            out.extend(DEFAULT_METHODS)
        else:
            try:
                out.append(MethodSpec.parse(str(item)))
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
    return out


def _settings(args) -> dict:
    cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = yaml.safe_load(fh) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a mapping")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        unknown = set(cfg) - CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        base = Path(args.config).parent
        for key in ("network", "scenarios", "out"):
            if isinstance(cfg.get(key), str) and not Path(cfg[key]).is_absolute():
                cfg[key] = str(base / cfg[key])
    for key, val in vars(args).items():
        if key in CONFIG_KEYS and val is not None:
            cfg[key] = val
    return cfg


def _inputs(cfg):
    scen_path = cfg.get("scenarios") or io.fixture_path("synthetic_year.csv")
    s = io.load_scenarios(scen_path)
    days = cfg.get("days")
    if days is not None:
        days = int(days)
        if not 1 <= days <= s.n:
            raise ConfigError(f"days must be in 1..{s.n}")
        s = s.subset(range(days))
    net = io.load_network(cfg.get("network") or io.fixture_path("garver6.yaml"), s.channel_labels)
    return net, s


def _bench_options(cfg, k_default) -> BenchOptions:
    try:
        return BenchOptions(
            k_range=tuple(parse_k_range(cfg.get("k_range", k_default))),
            mip_gap=float(cfg.get("mip_gap", 1e-3)),
            seed=int(cfg.get("seed", 0)),
            repeats=int(cfg.get("repeats", 5)),
            normalization=str(cfg.get("normalization", "zscore")),
            rescale=bool(cfg.get("rescale", False)),
            oos=str(cfg.get("oos", "optimal")),
            lp_backend=str(cfg.get("lp_backend", "highs")),
            solver=str(cfg.get("solver", "auto")),
            time_limit=None if cfg.get("time_limit") is None else float(cfg["time_limit"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _check_options(o: BenchOptions):
    if not o.mip_gap >= 0:
        raise ConfigError("mip gap must be nonnegative")
    if o.solver not in SOLVE_METHODS:
        raise ConfigError(f"solver must be one of {SOLVE_METHODS}")
    if o.oos not in ("optimal", "all"):
        raise ConfigError("oos must be 'optimal' or 'all'")
    if o.repeats < 1:
        raise ConfigError("repeats must be at least 1")


def _out_dir(cfg) -> Path:
    return io.ensure_dir(cfg.get("out") or "scenagg-out")


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name)


def _write_log(path, rows):
    io.write_csv(path, ["node", "best_bound", "incumbent", "gap", "time_s"], rows)


def cmd_solve(cfg) -> int:
    net, s = _inputs(cfg)
    opts = _bench_options(cfg, "1")
    _check_options(opts)
    sol = solve_full(net, s, BnbOptions(rel_gap=opts.mip_gap, lp_backend=opts.lp_backend,
                                        time_limit=opts.time_limit), opts.solver)
    out = _out_dir(cfg)
    summary = {"network": net.name, "n_scenarios": s.n, "data_fingerprint": s.fingerprint(),
               "objective": sol.objective, "investment_cost": sol.investment_cost,
               "shed_energy_mwh": sol.shed_energy, "status": sol.status, "gap": sol.gap,
               "nodes": sol.nodes, "built": sol.built_lines,
               "capacity": {k: v for k, v in sorted(sol.capacity.items())}}
    io.dump_json(summary, out / "solution.json")
    _write_log(out / "solver_log.csv", sol.log)
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_reduce(cfg) -> int:
    net, s = _inputs(cfg)
    spec = parse_methods([cfg.get("method", "kmeans")])[0]
    if cfg.get("k") is None:
        raise ConfigError("reduce needs --k")
    opts = _bench_options(cfg, "1")
    red = reduce_scenarios(spec, s, int(cfg["k"]), seed=opts.seed, normalization=opts.normalization,
                           rescale=opts.rescale)
    out = _out_dir(cfg)
    path = out / f"reduced_{_safe(spec.name)}_k{red.n}.csv"
    io.write_scenarios(red, path)
    print(f"{spec.name}: {s.n} -> {red.n} scenarios, weights {red.weights.tolist()}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_bench(cfg) -> int:
    net, s = _inputs(cfg)
    methods = parse_methods(cfg.get("methods"))
    opts = _bench_options(cfg, "1..10")
    _check_options(opts)
    report = run_benchmark(net, s, methods, opts, progress=log.info)
    if cfg.get("load_levels") is not None:
        report.sensitivity = run_sensitivity(net, s, parse_levels(cfg["load_levels"]), opts,
                                             progress=log.info)
    out = _out_dir(cfg)
    io.write_report(report, out)
    logs = io.ensure_dir(out / "logs")
    _write_log(logs / "baseline.csv", report.baseline_log)
    for i, c in enumerate(report.cells):
        _write_log(logs / f"{i:03d}_{_safe(c.method)}_k{c.k}.csv", c.log)
    for r in report.sensitivity:
        _write_log(logs / f"sensitivity_{round(100 * r.level)}.csv", r.log)
    for row in report.summaries:
        print(f"{row.method:28s} K*={row.optimal_k}  OOS gap={row.oos_gap_pct}")
    if report.failed:
        for c in report.failed:
            print(f"failed: {getattr(c, 'method', '')} {c.error}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_sensitivity(cfg) -> int:
    net, s = _inputs(cfg)
    opts = _bench_options(cfg, "1")
    _check_options(opts)
    levels = parse_levels(cfg.get("load_levels", list(DEFAULT_LEVELS)))
    if any(not v > 0 for v in levels):
        raise ConfigError("load levels must be positive")
    rows = run_sensitivity(net, s, levels, opts, progress=log.info)
    report = SensitivityReport(net.name, s.fingerprint(), s.n,
                               {"mip_gap": opts.mip_gap, "solver": opts.solver, "levels": levels}, rows)
    out = _out_dir(cfg)
    io.write_report(report, out)
    logs = io.ensure_dir(out / "logs")
    for r in rows:
        _write_log(logs / f"sensitivity_{round(100 * r.level)}.csv", r.log)
        print(f"{r.level:4.0%}  status={r.status} nodes={r.nodes} gap={r.gap} time={r.wall_time:.1f}s")
    return EXIT_FAILED if report.failed else EXIT_OK


def cmd_export_mps(cfg) -> int:
    net, s = _inputs(cfg)
    inst = build_tep(net, s)
    out = _out_dir(cfg)
    path = out / f"tep_{_safe(net.name)}_{s.n}.mps"
    aliases = write_mps(inst, path)
    print(f"wrote {path} ({inst.n_vars} columns, {inst.n_rows} rows, {len(aliases)} aliased names)")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "reduce": cmd_reduce, "bench": cmd_bench,
            "sensitivity": cmd_sensitivity, "export-mps": cmd_export_mps}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="YAML file with default settings")
    common.add_argument("--network", help="network YAML (default: bundled Garver 6-bus)")
    common.add_argument("--scenarios", help="hourly CSV (default: bundled synthetic year)")
    common.add_argument("--days", type=int, help="use only the first N daily scenarios")
    common.add_argument("--out", help="output directory")
    common.add_argument("--mip-gap", dest="mip_gap", type=float, help="relative MIP gap (default 0.001)")
    common.add_argument("--seed", type=int, help="root seed (default 0)")
    common.add_argument("--solver", choices=SOLVE_METHODS, help="full-problem solve method")
    common.add_argument("--lp-backend", dest="lp_backend", choices=("highs", "simplex"))
    common.add_argument("--time-limit", dest="time_limit", type=float)
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="scenagg", description="Scenario aggregation and TEP benchmark")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("solve", parents=[common], help="solve the planning problem on a scenario set")
    r = sub.add_parser("reduce", parents=[common], help="reduce a scenario set with one method")
    r.add_argument("--method", help="method, e.g. kmeans/centroid, hac-ward/medoid, fsa-dupacova")
    r.add_argument("--k", type=int, help="number of representatives")
    b = sub.add_parser("bench", parents=[common], help="run the aggregation benchmark")
    b.add_argument("--methods", help="comma list of methods or 'default'")
    b.add_argument("--k-range", dest="k_range", help="A..B or comma list (default 1..10)")
    b.add_argument("--repeats", type=int, help="timing repetitions (default 5)")
    b.add_argument("--oos", choices=("optimal", "all"), help="cells evaluated out of sample")
    b.add_argument("--load-levels", dest="load_levels", help="also run a demand sweep")
    s = sub.add_parser("sensitivity", parents=[common], help="demand-scaling sweep")
    s.add_argument("--load-levels", dest="load_levels", help="comma list (default 0.6..2.0 by 0.2)")
    sub.add_parser("export-mps", parents=[common], help="write the planning MILP as fixed MPS")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(message)s", stream=sys.stderr)
    try:
        cfg = _settings(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, ScenaggError, ValueError) as exc:
        print(f"scenagg {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
