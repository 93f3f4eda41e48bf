"""Reference branch-and-bound solver and an exhaustive oracle.

The B&B is deliberately small: best-bound node selection, most-fractional
branching, pruning by objective bound, no presolve or cuts. It exists to
provide reference optima (z_ref) and integrality gaps, not speed.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from typing import Optional

import numpy as np

from .errors import TooLarge, Unsolved
from .model import INF, Instance, LpSolution, MipSolution, TOL_INT
from .simplex import solve_lp

_PRUNE_TOL = 1e-9


def _fractional_int_vars(inst: Instance, x: np.ndarray) -> list[tuple[int, float]]:
    """(index, frac) for integer variables whose LP value is fractional."""
    out = []
    for j in inst.int_indices:
        frac = x[j] - math.floor(x[j])
        if min(frac, 1.0 - frac) > TOL_INT:
            out.append((int(j), frac))
    return out


def solve_bnb(inst: Instance, max_nodes: int = 100_000,
              max_seconds: float = 60.0) -> MipSolution:
    """Solve the MILP by LP-based branch and bound.

    Returns Optimal when the tree is exhausted, Feasible when a limit is hit
    with an incumbent in hand, Limit when a limit is hit empty-handed, and
    Infeasible when the root relaxation (hence the MILP) has no point.
    """
    t_start = time.monotonic()
    root = solve_lp(inst)
    if root.status == LpSolution.INFEASIBLE:
        return MipSolution(status=MipSolution.INFEASIBLE, nodes=1)
    if root.status != LpSolution.OPTIMAL:
        raise Unsolved(f"root relaxation ended with status {root.status}")

    incumbent: Optional[np.ndarray] = None
    incumbent_obj = INF
    nodes_solved = 1
    counter = itertools.count()
    # Heap of (lp_bound, tiebreak, overrides, lp_solution); best bound first.
    heap: list = []

    def enqueue(bound: float, overrides: dict, sol: LpSolution) -> None:
        heapq.heappush(heap, (bound, next(counter), overrides, sol))

    def handle(sol: LpSolution, overrides: dict) -> None:
        nonlocal incumbent, incumbent_obj
        fracs = _fractional_int_vars(inst, sol.x)
        if not fracs:
            if sol.objective < incumbent_obj:
                incumbent, incumbent_obj = sol.x.copy(), sol.objective
            return
        enqueue(sol.objective, overrides, sol)

    handle(root, {})

    limit_hit = False
    while heap:
        if nodes_solved >= max_nodes or time.monotonic() - t_start > max_seconds:
            limit_hit = True
            break
        bound, _, overrides, sol = heapq.heappop(heap)
        if bound >= incumbent_obj - _PRUNE_TOL:
            continue
        # Most-fractional branching, ties to the lowest index.
        fracs = _fractional_int_vars(inst, sol.x)
        j, frac = min(fracs, key=lambda t: (abs(t[1] - 0.5), t[0]))
        value = sol.x[j]
        for child_lo, child_hi in (
            (None, math.floor(value)),   # down branch
            (math.ceil(value), None),    # up branch
        ):
            child = dict(overrides)
            base_lo, base_hi = child.get(j, (inst.lb[j], inst.ub[j]))
            lo = base_lo if child_lo is None else max(base_lo, child_lo)
            hi = base_hi if child_hi is None else min(base_hi, child_hi)
            child[j] = (lo, hi)
            if lo > hi:
                continue
            child_sol = solve_lp(inst, overrides=child)
            nodes_solved += 1
            if child_sol.status == LpSolution.INFEASIBLE:
                continue
            if child_sol.status != LpSolution.OPTIMAL:
                raise Unsolved(f"node relaxation status {child_sol.status}")
            if child_sol.objective >= incumbent_obj - _PRUNE_TOL:
                continue
            handle(child_sol, child)

    open_bounds = [entry[0] for entry in heap]
    if limit_hit:
        dual = min(open_bounds) if open_bounds else incumbent_obj
        if incumbent is not None:
            return MipSolution(status=MipSolution.FEASIBLE, incumbent=incumbent,
                               objective=incumbent_obj, dual_bound=dual,
                               nodes=nodes_solved)
        return MipSolution(status=MipSolution.LIMIT, dual_bound=dual,
                           nodes=nodes_solved)
    if incumbent is None:
        return MipSolution(status=MipSolution.INFEASIBLE, dual_bound=INF,
                           nodes=nodes_solved)
    return MipSolution(status=MipSolution.OPTIMAL, incumbent=incumbent,
                       objective=incumbent_obj, dual_bound=incumbent_obj,
                       nodes=nodes_solved)


_ENUM_CAP = 1 << 20


def brute_force_opt(inst: Instance, enum_cap: int = _ENUM_CAP) -> MipSolution:
    """Exhaustive oracle: enumerate every integer assignment.

    Pure-integer instances are checked row by row; mixed instances solve the
    continuous remainder LP for each assignment. Raises TooLarge when the
    product of integer domain sizes exceeds ``enum_cap``.
    """
    ints = [int(j) for j in inst.int_indices]
    if not ints:
        lp = solve_lp(inst)
        if lp.status == LpSolution.INFEASIBLE:
            return MipSolution(status=MipSolution.INFEASIBLE, nodes=0)
        if lp.status != LpSolution.OPTIMAL:
            raise Unsolved(f"continuous relaxation status {lp.status}")
        return MipSolution(status=MipSolution.OPTIMAL, incumbent=lp.x,
                           objective=lp.objective, dual_bound=lp.objective,
                           nodes=1)

    domains = []
    total = 1
    for j in ints:
        if not (math.isfinite(inst.lb[j]) and math.isfinite(inst.ub[j])):
            raise TooLarge(f"integer variable {j} has an infinite domain")
        size = int(inst.ub[j]) - int(inst.lb[j]) + 1
        total *= size
        if total > enum_cap:
            raise TooLarge(f"enumeration would visit > {enum_cap} assignments")
        domains.append(range(int(inst.lb[j]), int(inst.ub[j]) + 1))

    all_int = len(ints) == inst.num_vars
    best_x, best_obj = None, INF
    tried = 0

    if all_int:
        a = inst.dense_matrix()
        rhs = inst.rhs
        le = np.array([s == "LE" for s in inst.sense])
        ge = np.array([s == "GE" for s in inst.sense])
        eq = np.array([s == "EQ" for s in inst.sense])
        for chunk in _chunks(itertools.product(*domains), 4096):
            xs = np.array(chunk, dtype=float)
            tried += len(xs)
            rows = xs @ a.T
            ok = np.ones(len(xs), dtype=bool)
            if le.any():
                ok &= np.all(rows[:, le] <= rhs[le] + 1e-9, axis=1)
            if ge.any():
                ok &= np.all(rows[:, ge] >= rhs[ge] - 1e-9, axis=1)
            if eq.any():
                ok &= np.all(np.abs(rows[:, eq] - rhs[eq]) <= 1e-9, axis=1)
            if not ok.any():
                continue
            objs = xs[ok] @ inst.obj
            i = int(np.argmin(objs))
            if objs[i] < best_obj:
                best_obj = float(objs[i])
                best_x = xs[ok][i]
    else:
        for assignment in itertools.product(*domains):
            tried += 1
            overrides = {j: (float(v), float(v)) for j, v in zip(ints, assignment)}
            lp = solve_lp(inst, overrides=overrides)
            if lp.status == LpSolution.INFEASIBLE:
                continue
            if lp.status != LpSolution.OPTIMAL:
                raise Unsolved(f"remainder LP status {lp.status}")
            if lp.objective < best_obj:
                best_obj, best_x = lp.objective, lp.x.copy()

    if best_x is None:
        return MipSolution(status=MipSolution.INFEASIBLE, dual_bound=INF,
                           nodes=tried)
    return MipSolution(status=MipSolution.OPTIMAL, incumbent=best_x,
                       objective=best_obj, dual_bound=best_obj, nodes=tried)


def _chunks(iterable, size):
    it = iter(iterable)
    while True:
        block = list(itertools.islice(it, size))
        if not block:
            return
        yield block


def integrality_gap(inst: Instance, max_nodes: int = 100_000,
                    max_seconds: float = 60.0) -> float:
    """|z_LP - z*|: distance between the root relaxation and the optimum."""
    lp = solve_lp(inst)
    if lp.status != LpSolution.OPTIMAL:
        raise Unsolved(f"root LP status {lp.status}")
    mip = solve_bnb(inst, max_nodes=max_nodes, max_seconds=max_seconds)
    if mip.status != MipSolution.OPTIMAL:
        raise Unsolved(f"branch and bound status {mip.status}")
    return abs(lp.objective - mip.objective)
