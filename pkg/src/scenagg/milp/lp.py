"""LP relaxation backends with a common session interface.

A session holds one instance and re-solves it under changed column bounds.
The HiGHS session keeps its basis between calls, so branch-and-bound node
solves are warm-started.
"""
from __future__ import annotations

import numpy as np

from .model import MilpInstance
from .simplex import LpResult, simplex_solve

BACKENDS = ("highs", "simplex")


def _row_bounds(inst: MilpInstance):
    lo = np.where(inst.sense == "L", -np.inf, inst.rhs)
    hi = np.where(inst.sense == "G", np.inf, inst.rhs)
    return lo, hi


class SimplexSession:
    """Cold-start re-solves with the dense simplex; meant for small models."""

    def __init__(self, inst: MilpInstance):
        self.inst = inst
        self._A = inst.A.toarray()

    def solve(self, lb=None, ub=None) -> LpResult:
        inst = self.inst
        lb = inst.lb if lb is None else lb
        ub = inst.ub if ub is None else ub
        res = simplex_solve(inst.c, self._A, inst.sense, inst.rhs, lb, ub)
        if res.ok:
            res.objective += inst.offset
        return res


class HighsSession:
    def __init__(self, inst: MilpInstance, presolve: bool = True, threads: int = 1):
        import highspy

        self._hs = highspy
        self.inst = inst
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("threads", threads)
        h.setOptionValue("random_seed", 0)
        if not presolve:
            h.setOptionValue("presolve", "off")
        lp = highspy.HighsLp()
        lp.num_col_ = inst.n_vars
        lp.num_row_ = inst.n_rows
        lp.col_cost_ = inst.c
        lp.col_lower_ = inst.lb
        lp.col_upper_ = inst.ub
        rlo, rhi = _row_bounds(inst)
        lp.row_lower_ = rlo
        lp.row_upper_ = rhi
        lp.offset_ = inst.offset
        csc = inst.A.tocsc()
        lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
        lp.a_matrix_.start_ = csc.indptr.astype(np.int32)
        lp.a_matrix_.index_ = csc.indices.astype(np.int32)
        lp.a_matrix_.value_ = csc.data
        h.passModel(lp)
        self.h = h
        self._lb = inst.lb.copy()
        self._ub = inst.ub.copy()
        self.solves = 0

    def solve(self, lb=None, ub=None) -> LpResult:
        lb = self.inst.lb if lb is None else np.asarray(lb, float)
        ub = self.inst.ub if ub is None else np.asarray(ub, float)
        changed = np.flatnonzero((lb != self._lb) | (ub != self._ub))
        if changed.size:
            self.h.changeColsBounds(changed.size, changed.astype(np.int32),
                                    lb[changed], ub[changed])
            self._lb[changed] = lb[changed]
            self._ub[changed] = ub[changed]
        if np.any(lb > ub):
            return LpResult("infeasible")
        self.h.run()
        self.solves += 1
        status = self.h.getModelStatus()
        S = self._hs.HighsModelStatus
        if status not in (S.kOptimal, S.kInfeasible, S.kUnbounded, S.kUnboundedOrInfeasible):
            # a stale basis can stall on badly scaled rows; retry from scratch
            self.h.clearSolver()
            self.h.run()
            status = self.h.getModelStatus()
        if status == S.kOptimal:
            sol = self.h.getSolution()
            x = np.asarray(sol.col_value)
            info = self.h.getInfo()
            return LpResult("optimal", float(info.objective_function_value), x,
                            np.asarray(sol.row_dual), np.asarray(sol.col_dual),
                            int(info.simplex_iteration_count))
        if status == S.kInfeasible:
            return LpResult("infeasible")
        if status in (S.kUnbounded, S.kUnboundedOrInfeasible):
            return LpResult("unbounded" if status == S.kUnbounded else "infeasible")
        return LpResult(f"error:{self.h.modelStatusToString(status)}")


def lp_session(inst: MilpInstance, backend: str = "highs", **kw):
    if backend == "highs":
        return HighsSession(inst, **kw)
    if backend == "simplex":
        return SimplexSession(inst)
    raise ValueError(f"unknown LP backend {backend!r}; expected one of {BACKENDS}")


def solve_lp(inst: MilpInstance, backend: str = "highs") -> LpResult:
    """Solve the LP relaxation of ``inst``; the objective includes the offset."""
    return lp_session(inst, backend).solve()
