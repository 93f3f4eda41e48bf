"""Root-node diving: repeatedly tighten one fractional variable and re-solve.

The dive is budgeted by d_max total LP solves (the root solve included),
never backtracks, and records every roundable solution it passes. All
outcomes are encoded in the result; the dive itself never raises for any
scorer, including generated ones.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import UnknownScorer
from .features import FeatureVector, PseudocostState, extract_features
from .model import Instance, LockCounts, LpSolution, TOL_INT, check_feasible, compute_locks
from .simplex import solve_lp

ROUND_TOL = 1e-6     # feasibility tolerance after snapping integers

BUILTIN_SCORERS = ("fractional", "coefficient", "pseudocost", "random")


@dataclass
class Scorer:
    """A scoring rule: FeatureVector -> (score, roundup). Total by contract."""

    kind: str
    fn: Callable[[FeatureVector], tuple[float, bool]]

    def __call__(self, fv: FeatureVector) -> tuple[float, bool]:
        score, roundup = self.fn(fv)
        return float(score), bool(roundup)


def _dist_to_int(v: float) -> float:
    return abs(v - math.floor(v + 0.5))


def _fractional_scorer(fv: FeatureVector) -> tuple[float, bool]:
    return -_dist_to_int(fv.candsol), fv.candsfrac > 0.5


def _coefficient_scorer(fv: FeatureVector) -> tuple[float, bool]:
    score = -float(min(fv.nlocksdown, fv.nlocksup))
    if fv.nlocksup != fv.nlocksdown:
        roundup = fv.nlocksup < fv.nlocksdown
    else:
        # Direction tie: fall back to the fractional rule.
        roundup = fv.candsfrac > 0.5
    return score, roundup


def _pseudocost_scorer(fv: FeatureVector) -> tuple[float, bool]:
    down_cost = fv.pscostdown * fv.candsfrac
    up_cost = fv.pscostup * (1.0 - fv.candsfrac)
    return -min(down_cost, up_cost), up_cost < down_cost


def _random_scorer(seed: int) -> Callable[[FeatureVector], tuple[float, bool]]:
    def fn(fv: FeatureVector) -> tuple[float, bool]:
        key = f"{seed}:{fv.candsol!r}:{fv.obj!r}:{fv.nNonz}:{fv.nlocksdown}:{fv.nlocksup}"
        digest = hashlib.sha256(key.encode()).digest()
        score = int.from_bytes(digest[:8], "big") / 2.0 ** 64
        return score, bool(digest[8] & 1)
    return fn


def builtin_scorer(name: str, seed: int = 0) -> Scorer:
    """One of the reference scoring rules; UnknownScorer otherwise."""
    if name == "fractional":
        return Scorer("builtin:fractional", _fractional_scorer)
    if name == "coefficient":
        return Scorer("builtin:coefficient", _coefficient_scorer)
    if name == "pseudocost":
        return Scorer("builtin:pseudocost", _pseudocost_scorer)
    if name == "random":
        return Scorer(f"builtin:random:{seed}", _random_scorer(seed))
    raise UnknownScorer(f"no builtin scorer named {name!r}")


def program_scorer(program) -> Scorer:
    """Scorer backed by an expression-language program."""
    from .dsl import eval_program

    def fn(fv: FeatureVector) -> tuple[float, bool]:
        out = eval_program(program, fv)
        return out.score, out.roundup

    return Scorer("dsl", fn)


@dataclass
class DiveResult:
    solutions: list = field(default_factory=list)   # (x, objective) pairs
    best_objective: Optional[float] = None
    depth_reached: int = 0
    lp_resolves: int = 0
    terminated_by: str = "Integral"

    INTEGRAL = "Integral"
    INFEASIBLE = "Infeasible"
    DEPTH_LIMIT = "DepthLimit"


def default_dmax(inst: Instance) -> int:
    return min(500, len(inst.int_indices) + 10)


def _candidates(inst: Instance, x: np.ndarray) -> list[int]:
    out = []
    for j in inst.int_indices:
        frac = x[j] - math.floor(x[j])
        if min(frac, 1.0 - frac) > TOL_INT:
            out.append(int(j))
    return out


def simple_round(inst: Instance, x: np.ndarray,
                 locks: Optional[LockCounts] = None) -> Optional[np.ndarray]:
    """Round x to integrality along zero-lock directions, if possible.

    Every fractional integer variable must have at least one direction with
    zero locks; among safe directions the one improving the objective is
    preferred. Near-integral values are snapped. Returns the rounded point
    iff it verifies as feasible, else None.
    """
    if locks is None:
        locks = compute_locks(inst)
    rounded = np.asarray(x, dtype=float).copy()
    for j in inst.int_indices:
        v = rounded[j]
        frac = v - math.floor(v)
        if min(frac, 1.0 - frac) <= TOL_INT:
            rounded[j] = round(v)
            continue
        down_safe = locks.nlocksdown[j] == 0
        up_safe = locks.nlocksup[j] == 0
        if down_safe and up_safe:
            # Minimization: rounding down helps when the cost is positive.
            go_down = inst.obj[j] >= 0
        elif down_safe:
            go_down = True
        elif up_safe:
            go_down = False
        else:
            return None
        rounded[j] = math.floor(v) if go_down else math.ceil(v)
    if check_feasible(inst, rounded, tol=ROUND_TOL):
        return rounded
    return None


def dive(inst: Instance, scorer: Scorer, d_max: Optional[int] = None) -> DiveResult:
    """Run the generic diving loop under ``scorer``.

    Budget: at most d_max LP solves in total, the root solve included.
    Each iteration scores the fractional candidates, tightens the winner's
    bound in the scorer's direction (ties go to the lowest index; the
    chosen bound is ceil/floor of its LP value), re-solves, and collects a
    simple rounding of the new point when one exists. Stops on integrality,
    infeasibility, or budget exhaustion; never backtracks.
    """
    if d_max is None:
        d_max = default_dmax(inst)
    result = DiveResult()
    if d_max <= 0:
        result.terminated_by = DiveResult.DEPTH_LIMIT
        return result

    root = solve_lp(inst)
    if root.status != LpSolution.OPTIMAL:
        result.terminated_by = DiveResult.INFEASIBLE
        return result
    result.lp_resolves = 1

    locks = compute_locks(inst)
    col_nnz = np.zeros(inst.num_vars, dtype=int)
    for _, c, v in inst.cons:
        if v != 0.0:
            col_nnz[c] += 1
    pscost = PseudocostState(inst.num_vars)
    overrides: dict[int, tuple[float, float]] = {}
    root_x = root.x
    x, obj = root.x, root.objective

    def collect(point: np.ndarray) -> None:
        cand = simple_round(inst, point, locks)
        if cand is None:
            return
        cobj = float(inst.obj @ cand)
        for prev, _ in result.solutions:
            if np.array_equal(prev, cand):
                return
        result.solutions.append((cand, cobj))
        if result.best_objective is None or cobj < result.best_objective:
            result.best_objective = cobj

    collect(x)

    while True:
        cands = _candidates(inst, x)
        if not cands:
            result.terminated_by = DiveResult.INTEGRAL
            return result
        if result.lp_resolves >= d_max:
            result.terminated_by = DiveResult.DEPTH_LIMIT
            return result

        best_j, best_score, best_up, best_frac = -1, -math.inf, False, 0.0
        for j in cands:
            fv = extract_features(inst, x, root_x, locks, pscost, j,
                                  col_nnz=int(col_nnz[j]))
            score, roundup = scorer(fv)
            if score > best_score:
                best_j, best_score, best_up, best_frac = j, score, roundup, fv.candsfrac

        lo, hi = overrides.get(best_j, (inst.lb[best_j], inst.ub[best_j]))
        if best_up:
            overrides[best_j] = (float(math.ceil(x[best_j])), hi)
        else:
            overrides[best_j] = (lo, float(math.floor(x[best_j])))

        res = solve_lp(inst, overrides=overrides)
        result.lp_resolves += 1
        result.depth_reached += 1
        if res.status != LpSolution.OPTIMAL:
            result.terminated_by = (
                DiveResult.DEPTH_LIMIT if res.status == LpSolution.ITERLIMIT
                else DiveResult.INFEASIBLE)
            return result

        move = (1.0 - best_frac) if best_up else best_frac
        if move > 1e-12:
            pscost.update(best_j, best_up, (res.objective - obj) / move)
        x, obj = res.x, res.objective
        collect(x)
