"""Bounded-variable primal simplex with Bland's anti-cycling rule.

Two-phase method on the equality form  A x + s + sigma a = b  where every
row gets a slack (bounds chosen by row sense) and an artificial column.
The working basis inverse is kept dense and updated in product form, with
periodic refactorization. Problem sizes here are desk scale, so dense
linear algebra is the right trade.

Nonbasic variables sit at a bound (or at zero when free); Bland's rule
picks the lowest-index eligible entering column and the lowest-index
blocking basic variable, which makes every solve deterministic and
provably finite.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .model import EQ, GE, INF, LE, Instance, LpSolution, TOL_FEAS

BASIC, AT_LOWER, AT_UPPER, FREE = 0, 1, 2, 3

_PIVOT_TOL = 1e-10       # smallest usable pivot / rate magnitude
_DUAL_TOL = 1e-9         # reduced-cost eligibility threshold
_RATIO_TIE = 1e-10       # ratio-test tie window for Bland's leaving rule
_PHASE1_TOL = 1e-7       # residual infeasibility above this => Infeasible
_REFACTOR_EVERY = 64


class _Tableau:
    """Mutable solver state for one solve_lp call."""

    def __init__(self, inst: Instance, lo: np.ndarray, hi: np.ndarray):
        n, m = inst.num_vars, inst.num_cons
        self.n, self.m = n, m
        self.ncols = n + 2 * m
        self.a = np.zeros((m, self.ncols))
        for r, c, v in inst.cons:
            self.a[r, c] = v
        self.b = inst.rhs.astype(float).copy()

        self.lo = np.concatenate([lo, np.zeros(2 * m)])
        self.hi = np.concatenate([hi, np.zeros(2 * m)])
        self.status = np.zeros(self.ncols, dtype=np.int8)
        self.val = np.zeros(self.ncols)

        for j in range(n):
            if self.lo[j] > -INF:
                self.status[j] = AT_LOWER
                self.val[j] = self.lo[j]
            elif self.hi[j] < INF:
                self.status[j] = AT_UPPER
                self.val[j] = self.hi[j]
            else:
                self.status[j] = FREE
                self.val[j] = 0.0

        # Slack columns n..n+m: value 0, bounds by sense.
        for i in range(m):
            col = n + i
            self.a[i, col] = 1.0
            s = inst.sense[i]
            if s == LE:
                self.lo[col], self.hi[col] = 0.0, INF
                self.status[col] = AT_LOWER
            elif s == GE:
                self.lo[col], self.hi[col] = -INF, 0.0
                self.status[col] = AT_UPPER
            else:  # EQ: slack pinned at zero
                self.lo[col], self.hi[col] = 0.0, 0.0
                self.status[col] = AT_LOWER

        # Artificial columns n+m..n+2m form the starting basis.
        resid = self.b - self.a[:, : n + m] @ self.val[: n + m]
        self.basic = np.arange(n + m, n + 2 * m)
        sigma = np.where(resid >= 0, 1.0, -1.0)
        for i in range(m):
            col = n + m + i
            self.a[i, col] = sigma[i]
            self.lo[col], self.hi[col] = 0.0, INF
            self.status[col] = BASIC
            self.val[col] = abs(resid[i])

        # The starting basis is diag(sigma), which is its own inverse.
        self.binv = np.diag(sigma)
        self.iterations = 0
        self.pivots_since_refactor = 0

    def refactor(self) -> None:
        if self.m == 0:
            return
        self.binv = np.linalg.inv(self.a[:, self.basic])
        self.recompute_basics()
        self.pivots_since_refactor = 0

    def recompute_basics(self) -> None:
        if self.m == 0:
            return
        nb_val = self.val.copy()
        nb_val[self.basic] = 0.0
        self.val[self.basic] = self.binv @ (self.b - self.a @ nb_val)

    def _entering(self, cost: np.ndarray) -> tuple[int, int]:
        """Lowest-index eligible column and its move direction, or (-1, 0)."""
        if self.m > 0:
            y = cost[self.basic] @ self.binv
            d = cost - y @ self.a
        else:
            d = cost.copy()
        for j in range(self.ncols):
            st = self.status[j]
            if st == BASIC or self.lo[j] == self.hi[j]:
                continue
            if st == AT_LOWER and d[j] < -_DUAL_TOL:
                return j, +1
            if st == AT_UPPER and d[j] > _DUAL_TOL:
                return j, -1
            if st == FREE and abs(d[j]) > _DUAL_TOL:
                return j, (-1 if d[j] > 0 else +1)
        return -1, 0

    def _ratio_test(self, q: int, t: int, w: np.ndarray) -> tuple[float, int, int]:
        """Max step for entering column q moving in direction t.

        Returns (delta, leave_pos, leave_status); leave_pos == -1 means a
        bound flip (or an unbounded ray when delta is infinite).
        """
        if self.lo[q] > -INF and self.hi[q] < INF:
            best = self.hi[q] - self.lo[q]
        else:
            best = INF
        leave_pos, leave_status = -1, AT_LOWER
        for i in range(self.m):
            rate = -t * w[i]
            if rate < -_PIVOT_TOL:
                bound = self.lo[self.basic[i]]
                if bound == -INF:
                    continue
                delta = (self.val[self.basic[i]] - bound) / (-rate)
                hit = AT_LOWER
            elif rate > _PIVOT_TOL:
                bound = self.hi[self.basic[i]]
                if bound == INF:
                    continue
                delta = (bound - self.val[self.basic[i]]) / rate
                hit = AT_UPPER
            else:
                continue
            if delta < 0.0:
                delta = 0.0
            # Bland: strict improvement, or tie broken by lowest var index.
            if delta < best - _RATIO_TIE:
                best, leave_pos, leave_status = delta, i, hit
            elif delta < best + _RATIO_TIE and leave_pos >= 0 and \
                    self.basic[i] < self.basic[leave_pos]:
                best, leave_pos, leave_status = min(best, delta), i, hit
        return best, leave_pos, leave_status

    def _apply_step(self, q: int, t: int, w: np.ndarray, delta: float,
                    leave_pos: int, leave_status: int) -> None:
        if self.m > 0 and delta > 0.0:
            self.val[self.basic] -= t * delta * w
        self.val[q] += t * delta
        if leave_pos < 0:
            # Bound flip: q stays nonbasic at its other bound.
            self.status[q] = AT_UPPER if t > 0 else AT_LOWER
            self.val[q] = self.hi[q] if t > 0 else self.lo[q]
            return
        out = self.basic[leave_pos]
        self.status[out] = leave_status
        self.val[out] = self.lo[out] if leave_status == AT_LOWER else self.hi[out]
        self.basic[leave_pos] = q
        self.status[q] = BASIC
        # Product-form inverse update for the replaced basis column.
        piv = w[leave_pos]
        self.binv[leave_pos, :] /= piv
        col = w.copy()
        col[leave_pos] = 0.0
        self.binv -= np.outer(col, self.binv[leave_pos, :])
        self.pivots_since_refactor += 1
        if self.pivots_since_refactor >= _REFACTOR_EVERY:
            self.refactor()

    def run(self, cost: np.ndarray, max_iters: int) -> str:
        """Iterate to optimality for one phase. Returns a phase status."""
        while True:
            if self.iterations >= max_iters:
                return LpSolution.ITERLIMIT
            q, t = self._entering(cost)
            if q < 0:
                return LpSolution.OPTIMAL
            self.iterations += 1
            w = self.binv @ self.a[:, q] if self.m > 0 else np.zeros(0)
            delta, leave_pos, leave_status = self._ratio_test(q, t, w)
            if delta == INF:
                return LpSolution.UNBOUNDED
            self._apply_step(q, t, w, delta, leave_pos, leave_status)


def solve_lp(inst: Instance, overrides: Optional[dict] = None,
             max_iters: Optional[int] = None) -> LpSolution:
    """Solve the LP relaxation of ``inst`` under optional bound tightenings.

    ``overrides`` maps variable index to an (lb, ub) pair that must tighten
    the instance bounds. Returns status Optimal with a vertex solution,
    or Infeasible / Unbounded / IterLimit.
    """
    n, m = inst.num_vars, inst.num_cons
    lo = inst.lb.astype(float).copy()
    hi = inst.ub.astype(float).copy()
    if overrides:
        for j, (olo, ohi) in overrides.items():
            if olo < lo[j] - TOL_FEAS or ohi > hi[j] + TOL_FEAS:
                raise ValueError(f"override relaxes bounds of variable {j}")
            lo[j] = max(lo[j], olo)
            hi[j] = min(hi[j], ohi)
    if np.any(lo > hi + TOL_FEAS):
        return LpSolution(status=LpSolution.INFEASIBLE)

    if max_iters is None:
        max_iters = 50 * (n + m)

    tab = _Tableau(inst, lo, hi)

    if m > 0:
        cost1 = np.zeros(tab.ncols)
        cost1[n + m:] = 1.0
        st = tab.run(cost1, max_iters)
        if st == LpSolution.ITERLIMIT:
            return LpSolution(status=st, iterations=tab.iterations)
        residual = float(np.sum(tab.val[n + m:]))
        if st == LpSolution.UNBOUNDED or residual > _PHASE1_TOL:
            # Phase 1 is bounded below by zero, so an unbounded report can
            # only be numerical noise; both cases mean no feasible point.
            return LpSolution(status=LpSolution.INFEASIBLE,
                              iterations=tab.iterations)
        # Pin artificials at zero for phase 2.
        tab.hi[n + m:] = 0.0
        tab.val[n + m:] = 0.0
        tab.refactor()

    cost2 = np.zeros(tab.ncols)
    cost2[:n] = inst.obj
    st = tab.run(cost2, max_iters)
    if st != LpSolution.OPTIMAL:
        return LpSolution(status=st, iterations=tab.iterations)

    tab.refactor()
    x = tab.val[:n].copy()
    return LpSolution(status=LpSolution.OPTIMAL, x=x,
                      objective=float(inst.obj @ x),
                      iterations=tab.iterations)
