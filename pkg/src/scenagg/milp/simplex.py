"""Dense bounded-variable revised simplex.

Every row gets a slack (``a.x + s = b``) whose bounds encode the sense.  The
start basis is all slacks with structurals at a finite bound; rows whose slack
would leave its range get an artificial, and phase 1 minimizes the artificial
sum.  Pricing is Dantzig, falling back to Bland's rule after a run of
degenerate pivots.  The basis inverse is product-form updated and rebuilt
from scratch every ``refactor`` pivots.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..errors import NumericalBreakdown

_PIV = 1e-9
_FEAS = 1e-9
_DUAL = 1e-9


@dataclass
class LpResult:
    status: str  # optimal | infeasible | unbounded | iteration_limit
    objective: float = float("nan")
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    iterations: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    def __init__(self, M, b, cost, lo, hi, basis, xval):
        self.M, self.b, self.lo, self.hi = M, b, lo, hi
        self.cost = cost
        self.basis = basis
        self.x = xval
        self.m = M.shape[0]
        self.is_basic = np.zeros(M.shape[1], dtype=bool)
        self.is_basic[basis] = True
        self.refactor()

    def refactor(self):
        B = self.M[:, self.basis]
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise NumericalBreakdown("singular basis") from exc
        nb = ~self.is_basic
        self.x[self.basis] = self.Binv @ (self.b - self.M[:, nb] @ self.x[nb])
        self.since = 0

    def run(self, max_iter, refactor_every, it0=0):
        it = it0
        degenerate = 0
        bland = False
        last_obj = float(self.cost @ self.x)
        while True:
            if it >= max_iter:
                return "iteration_limit", it
            y = self.cost[self.basis] @ self.Binv
            d = self.cost - y @ self.M
            d[self.is_basic] = 0.0
            at_lo = self.x <= self.lo + _FEAS
            at_hi = self.x >= self.hi - _FEAS
            up = (d < -_DUAL) & ~at_hi & ~self.is_basic
            down = (d > _DUAL) & ~at_lo & ~self.is_basic
            elig = np.flatnonzero(up | down)
            if elig.size == 0:
                return "optimal", it
            j = int(elig[0]) if bland else int(elig[np.argmax(np.abs(d[elig]))])
            direction = 1.0 if up[j] else -1.0
            alpha = self.Binv @ self.M[:, j]
            delta = -direction * alpha  # change of basics per unit step
            xb = self.x[self.basis]
            lob, hib = self.lo[self.basis], self.hi[self.basis]
            ratios = np.full(self.m, np.inf)
            dec = delta < -_PIV
            inc = delta > _PIV
            ratios[dec] = (xb[dec] - lob[dec]) / -delta[dec]
            ratios[inc] = (hib[inc] - xb[inc]) / delta[inc]
            ratios = np.maximum(ratios, 0.0)
            t_flip = self.hi[j] - self.lo[j]
            t_min = ratios.min() if self.m else np.inf
            if t_flip <= t_min:
                if not np.isfinite(t_flip):
                    return "unbounded", it
                self.x[self.basis] = xb + t_flip * delta
                self.x[j] = self.hi[j] if direction > 0 else self.lo[j]
            else:
                ties = np.flatnonzero(ratios <= t_min + 1e-12)
                if bland:
                    r = int(ties[np.argmin(self.basis[ties])])
                else:
                    r = int(ties[np.argmax(np.abs(delta[ties]))])
                t = ratios[r]
                leaving = self.basis[r]
                self.x[self.basis] = xb + t * delta
                self.x[j] += direction * t
                self.x[leaving] = lob[r] if delta[r] < 0 else hib[r]
                # product-form update of the inverse
                piv = alpha[r]
                row = self.Binv[r] / piv
                self.Binv -= np.outer(alpha, row)
                self.Binv[r] = row
                self.basis[r] = j
                self.is_basic[leaving] = False
                self.is_basic[j] = True
                self.since += 1
                if self.since >= refactor_every:
                    self.refactor()
            it += 1
            obj = float(self.cost @ self.x)
            if obj < last_obj - 1e-12 * max(1.0, abs(last_obj)):
                degenerate = 0
                bland = False
                last_obj = obj
            else:
                degenerate += 1
                if degenerate > 50:
                    bland = True


def simplex_solve(c, A, sense, rhs, lb, ub, max_iter=50_000, refactor_every=50) -> LpResult:
    """Solve ``min c.x`` s.t. ``A x (sense) rhs``, ``lb <= x <= ub``."""
    A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    c = np.asarray(c, dtype=float)
    b = np.asarray(rhs, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    sense = np.asarray(sense)
    m, n = A.shape
    if np.any(lb > ub):
        return LpResult("infeasible")
    s_lo = np.where(sense == "G", -np.inf, 0.0)
    s_hi = np.where(sense == "L", np.inf, 0.0)
    x0 = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
    resid = b - A @ x0
    s0 = np.clip(resid, s_lo, s_hi)
    r = resid - s0
    art = np.flatnonzero(np.abs(r) > _FEAS)
    sign = np.sign(r[art])
    Art = np.zeros((m, art.size))
    Art[art, np.arange(art.size)] = sign
    M = np.hstack([A, np.eye(m), Art])
    lo = np.concatenate([lb, s_lo, np.zeros(art.size)])
    hi = np.concatenate([ub, s_hi, np.full(art.size, np.inf)])
    x = np.concatenate([x0, s0, np.abs(r[art])])
    basis = np.arange(n, n + m)
    basis[art] = n + m + np.arange(art.size)  # artificials replace those slacks
    it = 0
    if art.size:
        cost1 = np.concatenate([np.zeros(n + m), np.ones(art.size)])
        tab = _Tableau(M, b, cost1, lo, hi, basis, x)
        status, it = tab.run(max_iter, refactor_every)
        if status == "iteration_limit":
            return LpResult(status, iterations=it)
        infeas = float(tab.x[n + m:].sum())
        if infeas > 1e-7 * max(1.0, np.abs(b).max(initial=0.0)):
            return LpResult("infeasible", iterations=it, meta={"phase1_infeasibility": infeas})
        hi[n + m:] = 0.0
        basis, x = tab.basis, tab.x
        x[n + m:] = 0.0
    cost2 = np.concatenate([c, np.zeros(m + art.size)])
    tab = _Tableau(M, b, cost2, lo, hi, basis, x)
    status, it = tab.run(max_iter, refactor_every, it)
    if status != "optimal":
        return LpResult(status, iterations=it)
    tab.refactor()
    y = cost2[tab.basis] @ tab.Binv
    xs = tab.x[:n].copy()
    return LpResult("optimal", float(c @ xs), xs, y, c - A.T @ y, it)
