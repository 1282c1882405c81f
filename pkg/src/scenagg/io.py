"""Scenario CSV and network YAML input, report output, bundled fixtures."""
from __future__ import annotations

import csv
import datetime as _dt
import json
import math
import os
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .core import ScenarioSet
from .errors import DanglingReference, IoFailure, NonFinite, NonRectangular, ParseError, SchemaError
from .network import Demand, Generator, Line, Network, Renewable

HOURS_PER_DAY = 24
TIME_COLUMNS = ("timestamp", "time", "datetime")
WEIGHT_COLUMN = "day_weight"
SCHEMA_VERSION = 1
NETWORK_SECTIONS = ("schema_version", "buses", "lines", "generators", "renewables", "demands", "costs")


def fixture_path(name: str) -> Path:
    """Path of a bundled data file (``garver6.yaml``, ``synthetic_year.csv``)."""
    p = resources.files("scenagg") / "data" / name
    return Path(str(p))


# -- scenarios ---------------------------------------------------------------

def load_scenarios(path, hours_per_scenario: int = HOURS_PER_DAY) -> ScenarioSet:
    """Fold an hourly CSV into daily scenarios.

    The header names the channels; an optional leading time column and an
    optional ``day_weight`` column are recognised.  Every data row is one hour.
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file", line=1) from None
        header = [h.strip() for h in header]
        skip = {i for i, h in enumerate(header) if h.lower() in TIME_COLUMNS}
        wcol = header.index(WEIGHT_COLUMN) if WEIGHT_COLUMN in header else None
        if wcol is not None:
            skip.add(wcol)
        chan_cols = [i for i in range(len(header)) if i not in skip]
        if not chan_cols:
            raise ParseError(f"{path}: no channel columns in header", line=1)
        labels = [header[i] for i in chan_cols]
        if len(set(labels)) != len(labels):
            raise ParseError(f"{path}: duplicate channel labels", line=1)
        values, weights = [], []
        for r, row in enumerate(reader, start=1):
            line = r + 1
            if not row or all(not c.strip() for c in row):
                raise NonRectangular(f"{path}: blank data row {r}", line=line)
            if len(row) != len(header):
                raise NonRectangular(
                    f"{path}: data row {r} has {len(row)} fields, header has {len(header)}", line=line)
            vals = []
            for i in chan_cols:
                vals.append(_parse_value(row[i], path, r, line, i + 1))
            values.append(vals)
            if wcol is not None:
                weights.append(_parse_value(row[wcol], path, r, line, wcol + 1))
    n_hours = len(values)
    if n_hours == 0:
        raise ParseError(f"{path}: no data rows", line=2)
    if n_hours % hours_per_scenario:
        raise NonRectangular(
            f"{path}: {n_hours} hourly rows do not fold into {hours_per_scenario}-hour scenarios",
            line=n_hours + 1)
    X = np.array(values)
    n = n_hours // hours_per_scenario
    cube = X.reshape(n, hours_per_scenario, len(labels)).transpose(0, 2, 1)
    w = None
    if wcol is not None:
        W = np.array(weights).reshape(n, hours_per_scenario)
        if np.any(W != W[:, :1]):
            bad = int(np.argwhere(W != W[:, :1])[0, 0])
            raise ParseError(f"{path}: day_weight varies within scenario {bad}",
                             line=bad * hours_per_scenario + 2)
        w = W[:, 0]
    return ScenarioSet(cube.reshape(n, -1), w, labels, hours_per_scenario)


def _parse_value(raw, path, r, line, col):
    try:
        v = float(raw)
    except ValueError:
        raise ParseError(f"{path}: data row {r}: cannot parse {raw!r}", line=line, column=col) from None
    if not math.isfinite(v):
        raise NonFinite(f"{path}: data row {r}: non-finite value {raw.strip()!r}", line=line, column=col)
    return v


def write_scenarios(s: ScenarioSet, path, start: str = "2019-01-01T00:00") -> None:
    """Unfold ``s`` into the hourly CSV layout read by :func:`load_scenarios`."""
    t0 = _dt.datetime.fromisoformat(start)
    cube = s.cube()  # (n, C, H)
    uniform = bool(np.all(s.weights == 1.0))
    header = ["timestamp", *s.channel_labels] + ([] if uniform else [WEIGHT_COLUMN])
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            h = 0
            for k in range(s.n):
                for t in range(s.hours):
                    stamp = (t0 + _dt.timedelta(hours=h)).strftime("%Y-%m-%dT%H:%M")
                    row = [stamp, *(repr(float(v)) for v in cube[k, :, t])]
                    if not uniform:
                        row.append(repr(float(s.weights[k])))
                    w.writerow(row)
                    h += 1
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def synthetic_year(seed: int = 2019, days: int = 365) -> ScenarioSet:
    """Seeded hourly load and wind profiles with daily, weekly and seasonal shape.

    Channels: ``load_a`` and ``load_b`` as fractions of their annual peak and
    ``wind`` as a capacity factor in [0, 1].
    """
    rng = np.random.default_rng(seed)
    H = days * HOURS_PER_DAY
    t = np.arange(H)
    hour = t % 24
    day = t // 24
    season = np.cos(2 * np.pi * (day - 15) / 365.0)  # +1 mid-January
    weekend = np.isin(day % 7, (5, 6))
    # two-hump daily shape (morning and evening peaks)
    daily_a = (0.55 + 0.25 * np.exp(-((hour - 9) / 3.0) ** 2) + 0.3 * np.exp(-((hour - 19) / 2.5) ** 2))
    daily_b = (0.6 + 0.35 * np.exp(-((hour - 14) / 4.0) ** 2))  # flatter, midday peak
    noise = _ar1(rng, H, 0.9, 0.03)
    noise_b = 0.6 * noise + _ar1(rng, H, 0.9, 0.02)
    load_a = daily_a * (1 + 0.18 * season) * np.where(weekend, 0.85, 1.0) + noise
    load_b = daily_b * (1 + 0.1 * season) * np.where(weekend, 0.9, 1.0) + noise_b
    load_a = np.clip(load_a, 0.05, None)
    load_b = np.clip(load_b, 0.05, None)
    load_a /= load_a.max()
    load_b /= load_b.max()
    latent = _ar1(rng, H, 0.985, 0.22) + 0.45 * season - 0.6 + 0.15 * np.cos(2 * np.pi * (hour - 3) / 24)
    wind = 1.0 / (1.0 + np.exp(-2.2 * latent))
    wind = np.clip(wind + rng.normal(0, 0.015, H), 0.0, 1.0)
    X = np.stack([load_a, load_b, wind], axis=1).round(6)
    cube = X.reshape(days, HOURS_PER_DAY, 3).transpose(0, 2, 1)
    return ScenarioSet(cube.reshape(days, -1), None, ["load_a", "load_b", "wind"], HOURS_PER_DAY)


def _ar1(rng, n, phi, sd):
    e = rng.normal(0, sd, n)
    out = np.empty(n)
    acc = 0.0
    for i in range(n):
        acc = phi * acc + e[i]
        out[i] = acc
    return out


# -- network -----------------------------------------------------------------

_LINE_KEYS = {"name", "from", "to", "reactance", "susceptance", "existing", "capacity", "f_max",
              "f_min", "cost_fixed", "cost_variable"}
_GEN_KEYS = {"name", "bus", "p_max", "cost", "ramp_up", "ramp_down"}
_REN_KEYS = {"name", "bus", "channel", "capacity", "cost"}
_DEM_KEYS = {"name", "bus", "channel", "scale"}


def _items(doc, section):
    items = doc[section]
    if items is None:
        return []
    if not isinstance(items, list):
        raise SchemaError(f"section '{section}' must be a list")
    for i, it in enumerate(items):
        if not isinstance(it, dict):
            raise SchemaError(f"{section}[{i}] must be a mapping")
    return items


def _req(item, key, where):
    if key not in item:
        raise SchemaError(f"{where}: missing field '{key}'")
    return item[key]


def _check_keys(item, allowed, where):
    extra = set(item) - allowed
    if extra:
        raise SchemaError(f"{where}: unknown field(s) {sorted(extra)}")


def network_from_dict(doc: dict, channels=None) -> Network:
    """Build a validated network from a parsed network document.

    ``channels``, when given, is the set of scenario channel labels every
    demand and renewable binding must name.
    """
    if not isinstance(doc, dict):
        raise SchemaError("network document must be a mapping")
    for sec in NETWORK_SECTIONS:
        if sec not in doc:
            raise SchemaError(f"missing section '{sec}'")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {doc['schema_version']!r}")
    buses = [str(b) for b in (doc["buses"] or [])]
    if not buses:
        raise SchemaError("section 'buses' is empty")
    known = set(buses)

    def bus(item, key, where):
        b = str(_req(item, key, where))
        if b not in known:
            raise DanglingReference(f"{where}: unknown bus {b!r}")
        return b

    lines = []
    for i, it in enumerate(_items(doc, "lines")):
        where = f"lines[{i}]"
        _check_keys(it, _LINE_KEYS, where)
        name = str(_req(it, "name", where))
        if ("reactance" in it) == ("susceptance" in it):
            raise SchemaError(f"{where}: give exactly one of 'reactance' or 'susceptance'")
        b = 1.0 / float(it["reactance"]) if "reactance" in it else float(it["susceptance"])
        existing = bool(it.get("existing", False))
        cap = float(it.get("capacity", 0.0))
        f_max = float(it.get("f_max", cap))
        f_min = float(it.get("f_min", cap if existing else 0.0))
        lines.append(Line(name, bus(it, "from", where), bus(it, "to", where), b, f_max, f_min,
                          float(it.get("cost_fixed", 0.0)), float(it.get("cost_variable", 0.0)),
                          existing, cap if existing else 0.0))
    gens = []
    for i, it in enumerate(_items(doc, "generators")):
        where = f"generators[{i}]"
        _check_keys(it, _GEN_KEYS, where)
        gens.append(Generator(str(_req(it, "name", where)), bus(it, "bus", where),
                              float(_req(it, "p_max", where)), float(_req(it, "cost", where)),
                              float(it.get("ramp_up", math.inf)), float(it.get("ramp_down", -math.inf))))
    rens, dems = [], []
    for sec, keys, out in (("renewables", _REN_KEYS, rens), ("demands", _DEM_KEYS, dems)):
        for i, it in enumerate(_items(doc, sec)):
            where = f"{sec}[{i}]"
            _check_keys(it, keys, where)
            ch = str(_req(it, "channel", where))
            if channels is not None and ch not in channels:
                raise DanglingReference(f"{where}: unknown scenario channel {ch!r}")
            if sec == "renewables":
                out.append(Renewable(str(_req(it, "name", where)), bus(it, "bus", where), ch,
                                     float(it.get("capacity", 1.0)), float(it.get("cost", 0.0))))
            else:
                out.append(Demand(str(_req(it, "name", where)), bus(it, "bus", where), ch,
                                  float(it.get("scale", 1.0))))
    costs = doc["costs"] or {}
    if not isinstance(costs, dict):
        raise SchemaError("section 'costs' must be a mapping")
    return Network(buses, lines, gens, rens, dems, base_mva=float(doc.get("base_mva", 100.0)),
                   shed_cost=float(costs.get("load_shedding", 10_000.0)),
                   name=str(doc.get("name", "network")))


def load_network(path, channels=None) -> Network:
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ParseError(f"{path}: {exc}", line=mark.line + 1 if mark else None,
                         column=mark.column + 1 if mark else None) from exc
    return network_from_dict(doc, channels)


def network_to_dict(net: Network) -> dict:
    def num(v):
        return float(v) if math.isfinite(v) else None

    lines = []
    for ln in net.lines:
        d = {"name": ln.name, "from": ln.from_bus, "to": ln.to_bus, "susceptance": ln.susceptance,
             "existing": ln.existing, "capacity": ln.base_capacity if ln.existing else ln.f_max,
             "f_max": ln.f_max, "f_min": ln.f_min, "cost_fixed": ln.cost_fixed,
             "cost_variable": ln.cost_variable}
        lines.append(d)
    gens = []
    for g in net.generators:
        d = {"name": g.name, "bus": g.bus, "p_max": g.p_max, "cost": g.cost}
        if math.isfinite(g.ramp_up):
            d["ramp_up"] = num(g.ramp_up)
        if math.isfinite(g.ramp_down):
            d["ramp_down"] = num(g.ramp_down)
        gens.append(d)
    return {
        "schema_version": SCHEMA_VERSION, "name": net.name, "base_mva": net.base_mva,
        "buses": list(net.buses), "lines": lines, "generators": gens,
        "renewables": [{"name": r.name, "bus": r.bus, "channel": r.channel, "capacity": r.capacity,
                        "cost": r.cost} for r in net.renewables],
        "demands": [{"name": d.name, "bus": d.bus, "channel": d.channel, "scale": d.scale}
                    for d in net.demands],
        "costs": {"load_shedding": net.shed_cost},
    }


# -- reports -----------------------------------------------------------------

def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_csv(path, header, rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def dump_json(obj, path) -> None:
    try:
        with open(path, "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
            fh.write("\n")
    except (OSError, ValueError) as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def write_report(report, out_dir) -> dict:
    """Write every table of ``report`` plus ``report.json`` into ``out_dir``.

    Returns a mapping of table kind to written path.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {out}: {exc}") from exc
    written = {}
    for kind, (header, rows) in report.tables().items():
        p = out / f"{kind}.csv"
        write_csv(p, header, rows)
        written[kind] = p
    p = out / "report.json"
    dump_json(report.to_dict(), p)
    written["json"] = p
    return written


def read_report_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, ValueError) as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def ensure_dir(path) -> Path:
    p = Path(path)
    os.makedirs(p, exist_ok=True)
    return p
