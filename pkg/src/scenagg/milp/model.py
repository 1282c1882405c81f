"""Sparse mixed-binary linear program container."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

SENSES = ("L", "E", "G")  # <=, =, >=


@dataclass(eq=False)
class MilpInstance:
    """``min c.x + offset`` s.t. ``A x (sense) rhs``, ``lb <= x <= ub``, some x binary."""

    A: sp.csr_matrix
    sense: np.ndarray
    rhs: np.ndarray
    c: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    binary: np.ndarray
    var_names: list
    row_names: list
    offset: float = 0.0
    name: str = "model"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.A = sp.csr_matrix(self.A, dtype=float)
        self.sense = np.asarray(self.sense, dtype="<U1")
        for attr in ("rhs", "c", "lb", "ub"):
            setattr(self, attr, np.asarray(getattr(self, attr), dtype=float))
        self.binary = np.asarray(self.binary, dtype=bool)
        self.var_names = list(self.var_names)
        self.row_names = list(self.row_names)

    @property
    def n_vars(self) -> int:
        return self.A.shape[1]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    @property
    def binaries(self) -> np.ndarray:
        return np.flatnonzero(self.binary)

    def validate(self):
        m, n = self.A.shape
        if not (self.sense.shape == self.rhs.shape == (m,)):
            raise ValueError("row data lengths do not match the matrix")
        if not (self.c.shape == self.lb.shape == self.ub.shape == self.binary.shape == (n,)):
            raise ValueError("column data lengths do not match the matrix")
        if len(self.var_names) != n or len(self.row_names) != m:
            raise ValueError("one name per variable and per row required")
        if not set(np.unique(self.sense)) <= set(SENSES):
            raise ValueError("row senses must be L, E or G")
        for arr, what in ((self.A.data, "coefficient"), (self.rhs, "rhs"), (self.c, "objective")):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite {what}")
        if np.any(np.isnan(self.lb)) or np.any(np.isnan(self.ub)):
            raise ValueError("NaN bound")
        if np.any(self.lb > self.ub):
            raise ValueError("lower bound above upper bound")
        b = self.binary
        if np.any(self.lb[b] < 0) or np.any(self.ub[b] > 1):
            raise ValueError("binary variables need bounds within [0, 1]")
        if len(set(self.var_names)) != n or len(set(self.row_names)) != m:
            raise ValueError("variable and row names must be unique")
        return self

    def relaxed(self) -> MilpInstance:
        return replace(self, binary=np.zeros(self.n_vars, dtype=bool))

    def with_bounds(self, lb=None, ub=None) -> MilpInstance:
        return replace(self, lb=self.lb.copy() if lb is None else np.asarray(lb, float),
                       ub=self.ub.copy() if ub is None else np.asarray(ub, float))

    def objective(self, x) -> float:
        return float(self.c @ x + self.offset)

    def violation(self, x) -> float:
        """Largest absolute violation of rows and bounds at ``x``."""
        x = np.asarray(x, dtype=float)
        act = self.A @ x
        r = np.zeros(self.n_rows)
        L, G, E = self.sense == "L", self.sense == "G", self.sense == "E"
        r[L] = np.maximum(act[L] - self.rhs[L], 0)
        r[G] = np.maximum(self.rhs[G] - act[G], 0)
        r[E] = np.abs(act[E] - self.rhs[E])
        bnd = np.maximum(np.maximum(self.lb - x, x - self.ub), 0)
        return float(max(r.max(initial=0.0), bnd.max(initial=0.0)))

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        A = self.A.tocsr()
        for arr in (A.indptr, A.indices, A.data, self.rhs, self.c, self.lb, self.ub, self.binary):
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update("".join(self.sense.tolist()).encode())
        h.update(repr(self.offset).encode())
        return h.hexdigest()[:16]


class MilpBuilder:
    """Incremental construction of a :class:`MilpInstance` from blocks."""

    def __init__(self, name="model"):
        self.name = name
        self._c, self._lb, self._ub, self._bin, self._vn = [], [], [], [], []
        self._rows, self._cols, self._vals = [], [], []
        self._sense, self._rhs, self._rn = [], [], []
        self.n_vars = 0
        self.n_rows = 0
        self.offset = 0.0

    def add_vars(self, count, lb=0.0, ub=np.inf, cost=0.0, binary=False, names=None) -> np.ndarray:
        idx = np.arange(self.n_vars, self.n_vars + count)
        self._c.append(np.broadcast_to(np.asarray(cost, float), (count,)).copy())
        self._lb.append(np.broadcast_to(np.asarray(lb, float), (count,)).copy())
        self._ub.append(np.broadcast_to(np.asarray(ub, float), (count,)).copy())
        self._bin.append(np.full(count, bool(binary)))
        if names is None:
            names = [f"x{i}" for i in idx]
        names = list(names)
        if len(names) != count:
            raise ValueError("one name per variable required")
        self._vn.extend(names)
        self.n_vars += count
        return idx

    def add_rows(self, rows, cols, vals, sense, rhs, names) -> np.ndarray:
        """Append ``len(names)`` rows; ``rows`` are 0-based within the new block."""
        count = len(names)
        rows = np.asarray(rows, dtype=np.int64)
        if rows.size and (rows.min() < 0 or rows.max() >= count):
            raise ValueError("row index outside block")
        self._rows.append(rows + self.n_rows)
        self._cols.append(np.asarray(cols, dtype=np.int64))
        self._vals.append(np.asarray(vals, dtype=float))
        self._sense.append(np.broadcast_to(np.asarray(sense, dtype="<U1"), (count,)).copy())
        self._rhs.append(np.broadcast_to(np.asarray(rhs, float), (count,)).copy())
        self._rn.extend(names)
        idx = np.arange(self.n_rows, self.n_rows + count)
        self.n_rows += count
        return idx

    def build(self) -> MilpInstance:
        cat = lambda parts, dt=float: np.concatenate(parts) if parts else np.zeros(0, dtype=dt)
        A = sp.coo_matrix(
            (cat(self._vals), (cat(self._rows, np.int64), cat(self._cols, np.int64))),
            shape=(self.n_rows, self.n_vars),
        ).tocsr()
        A.sum_duplicates()
        return MilpInstance(
            A=A, sense=cat(self._sense, "<U1"), rhs=cat(self._rhs), c=cat(self._c),
            lb=cat(self._lb), ub=cat(self._ub), binary=cat(self._bin, bool),
            var_names=self._vn, row_names=self._rn, offset=self.offset, name=self.name,
        )
