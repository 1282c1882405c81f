"""Fixed-format MPS writer and reader.

Names longer than eight characters (or containing blanks) are replaced by
short unique aliases; the alias table is written next to the model as
``<file>.names.csv`` and applied again by :func:`read_mps`.  Numbers use the
shortest exact decimal form so a write/read cycle is lossless.  The objective
constant is stored as the negated right-hand side of the objective row.
"""
from __future__ import annotations

import csv
import math
import os

import numpy as np
import scipy.sparse as sp

from ..errors import IoFailure, NameTooLong, ParseError
from .model import MilpInstance

OBJ_ROW = "OBJ"
RHS_SET = "RHS"
BND_SET = "BND"
_SENSE_CODE = {"L": "L", "E": "E", "G": "G"}


def _num(v: float) -> str:
    s = repr(float(v))
    if s.endswith(".0"):
        s = s[:-2]
    return s


def _alias_table(names, prefix, taken):
    out = []
    used = set()
    for i, nm in enumerate(names):
        if len(nm) <= 8 and nm.strip() == nm and " " not in nm and nm not in used:
            alias = nm
        else:
            alias = f"{prefix}{i:07d}"
            if len(alias) > 8:
                raise NameTooLong(f"more than 10^7 {prefix}-entries cannot be aliased")
            if alias in taken:
                raise NameTooLong(f"alias {alias} collides with an existing name")
        used.add(alias)
        out.append(alias)
    return out


def _field(a, b, c=None, d=None):
    # fixed columns: 2-3, 5-12, 15-22, 25-36
    s = f" {a:<2} {b:<8}  {c:<8}" if c is not None else f" {a:<2} {b:<8}"
    if d is not None:
        s += f"  {d:>12}"
    return s.rstrip() + "\n"


def write_mps(inst: MilpInstance, path, strict_names: bool = False) -> dict:
    """Write ``inst`` to ``path``; returns the alias mapping (possibly empty)."""
    inst.validate()
    taken = set(inst.var_names) | set(inst.row_names) | {OBJ_ROW}
    if strict_names:
        bad = [n for n in (*inst.var_names, *inst.row_names) if len(n) > 8 or " " in n]
        if bad:
            raise NameTooLong(f"{len(bad)} names exceed eight characters, e.g. {bad[0]!r}")
    cols = _alias_table(inst.var_names, "C", taken)
    rows = _alias_table(inst.row_names, "R", taken)
    if OBJ_ROW in rows:
        raise NameTooLong(f"row name {OBJ_ROW} is reserved for the objective")
    mapping = {("col", a): o for a, o in zip(cols, inst.var_names) if a != o}
    mapping.update({("row", a): o for a, o in zip(rows, inst.row_names) if a != o})
    A = inst.A.tocsc()
    A.sort_indices()
    out = []
    out.append(f"NAME          {inst.name[:8] if ' ' not in inst.name else 'MODEL'}\n")
    out.append("ROWS\n")
    out.append(_field("N", OBJ_ROW))
    for r, s in zip(rows, inst.sense):
        out.append(_field(_SENSE_CODE[s], r))
    out.append("COLUMNS\n")
    in_int = False
    marker = 0
    for j, cname in enumerate(cols):
        is_bin = bool(inst.binary[j])
        if is_bin != in_int:
            kind = "'INTORG'" if is_bin else "'INTEND'"
            out.append(f"    MARKER{marker:04d}  'MARKER'                 {kind}\n")
            marker += 1
            in_int = is_bin
        entries = []
        if inst.c[j] != 0:
            entries.append((OBJ_ROW, inst.c[j]))
        for k in range(A.indptr[j], A.indptr[j + 1]):
            if A.data[k] != 0:
                entries.append((rows[A.indices[k]], A.data[k]))
        if not entries:
            entries.append((OBJ_ROW, 0.0))
        for rname, v in entries:
            out.append(_field("", cname, rname, _num(v)))
    if in_int:
        out.append(f"    MARKER{marker:04d}  'MARKER'                 'INTEND'\n")
    out.append("RHS\n")
    if inst.offset != 0:
        out.append(_field("", RHS_SET, OBJ_ROW, _num(-inst.offset)))
    for r, v in zip(rows, inst.rhs):
        if v != 0:
            out.append(_field("", RHS_SET, r, _num(v)))
    out.append("BOUNDS\n")
    for j, cname in enumerate(cols):
        lo, hi = inst.lb[j], inst.ub[j]
        if inst.binary[j]:
            out.append(_field("LO", BND_SET, cname, _num(lo)))
            out.append(_field("UP", BND_SET, cname, _num(hi)))
            continue
        if lo == hi:
            out.append(_field("FX", BND_SET, cname, _num(lo)))
            continue
        if lo == -math.inf and hi == math.inf:
            out.append(_field("FR", BND_SET, cname))
            continue
        if lo == -math.inf:
            out.append(_field("MI", BND_SET, cname))
        elif lo != 0:
            out.append(_field("LO", BND_SET, cname, _num(lo)))
        if hi != math.inf:
            out.append(_field("UP", BND_SET, cname, _num(hi)))
    out.append("ENDATA\n")
    try:
        with open(path, "w", newline="\n") as fh:
            fh.writelines(out)
        map_path = f"{os.fspath(path)}.names.csv"
        if mapping:
            with open(map_path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["kind", "mps_name", "name"])
                for (kind, alias), orig in mapping.items():
                    w.writerow([kind, alias, orig])
        elif os.path.exists(map_path):
            os.remove(map_path)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return {alias: orig for (_, alias), orig in mapping.items()}


def read_mps(path, mapping_path=None) -> MilpInstance:
    """Parse a file produced by :func:`write_mps` (or any blank-free fixed MPS)."""
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    mapping_path = mapping_path or f"{os.fspath(path)}.names.csv"
    alias = {"col": {}, "row": {}}
    if os.path.exists(mapping_path):
        with open(mapping_path, newline="") as fh:
            for rec in csv.DictReader(fh):
                alias[rec["kind"]][rec["mps_name"]] = rec["name"]

    name = "model"
    section = None
    obj_row = None
    row_idx, senses = {}, []
    col_idx, binary = {}, []
    coo_r, coo_c, coo_v = [], [], []
    cost = {}
    rhs = {}
    offset = 0.0
    bounds = {}
    in_int = False
    for ln, raw in enumerate(lines, start=1):
        if not raw.strip() or raw.startswith("*"):
            continue
        if not raw[0].isspace():
            head = raw.split()
            section = head[0]
            if section == "NAME" and len(head) > 1:
                name = head[1]
            if section == "ENDATA":
                break
            continue
        tok = raw.split()
        try:
            if section == "ROWS":
                kind, rname = tok
                if kind == "N":
                    if obj_row is None:
                        obj_row = rname
                    continue
                row_idx[rname] = len(senses)
                senses.append(kind)
            elif section == "COLUMNS":
                if len(tok) >= 3 and tok[1] == "'MARKER'":
                    in_int = tok[2] == "'INTORG'"
                    continue
                cname = tok[0]
                if cname not in col_idx:
                    col_idx[cname] = len(binary)
                    binary.append(in_int)
                j = col_idx[cname]
                for rname, val in zip(tok[1::2], tok[2::2]):
                    if rname == obj_row:
                        cost[j] = float(val)
                    else:
                        coo_r.append(row_idx[rname])
                        coo_c.append(j)
                        coo_v.append(float(val))
            elif section == "RHS":
                pairs = tok[1:] if len(tok) % 2 == 1 else tok
                for rname, val in zip(pairs[0::2], pairs[1::2]):
                    if rname == obj_row:
                        offset = -float(val)
                    else:
                        rhs[row_idx[rname]] = float(val)
            elif section == "BOUNDS":
                kind, cname = tok[0], tok[2]
                val = float(tok[3]) if len(tok) > 3 else None
                j = col_idx[cname]
                lo, hi = bounds.get(j, (0.0, 1.0 if binary[j] else math.inf))
                if kind == "LO":
                    lo = val
                elif kind == "UP":
                    hi = val
                elif kind == "FX":
                    lo = hi = val
                elif kind == "FR":
                    lo, hi = -math.inf, math.inf
                elif kind == "MI":
                    lo = -math.inf
                elif kind == "PL":
                    hi = math.inf
                elif kind == "BV":
                    lo, hi = 0.0, 1.0
                    binary[j] = True
                else:
                    raise ValueError(f"bound type {kind}")
                bounds[j] = (lo, hi)
            elif section == "RANGES":
                raise ValueError("RANGES are not supported")
        except (ValueError, KeyError, IndexError) as exc:
            raise ParseError(f"{path}: {exc}", line=ln) from exc
    m, n = len(senses), len(binary)
    lb = np.zeros(n)
    ub = np.array([1.0 if b else math.inf for b in binary])
    for j, (lo, hi) in bounds.items():
        lb[j], ub[j] = lo, hi
    c = np.zeros(n)
    for j, v in cost.items():
        c[j] = v
    b = np.zeros(m)
    for i, v in rhs.items():
        b[i] = v
    A = sp.csr_matrix((coo_v, (coo_r, coo_c)), shape=(m, n))
    rnames = [alias["row"].get(r, r) for r in row_idx]
    cnames = [alias["col"].get(cn, cn) for cn in col_idx]
    return MilpInstance(A=A, sense=np.array(senses, dtype="<U1"), rhs=b, c=c, lb=lb, ub=ub,
                        binary=np.array(binary, dtype=bool), var_names=cnames,
                        row_names=rnames, offset=offset, name=name)
