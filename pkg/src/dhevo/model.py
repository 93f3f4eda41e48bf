"""MILP data model: instances in sparse triplet form, solution records, locks.

An :class:`Instance` is the minimization problem

    min c'x  s.t.  A x {<=,>=,=} b,  lb <= x <= ub,  x_j integer for j in I,

held as parallel arrays plus a list of (row, col, coef) triplets for A.
Instances are treated as immutable once validated; every solver takes bound
tightenings as a separate override map rather than mutating the instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateEntry,
    EmptyBoundBox,
    IndexOutOfRange,
)

TOL_FEAS = 1e-9
TOL_INT = 1e-7

LE, GE, EQ = "LE", "GE", "EQ"
SENSES = (LE, GE, EQ)

INF = float("inf")


@dataclass
class Instance:
    """A MILP in sparse form. Vectors are float64/bool numpy arrays."""

    name: str
    obj: np.ndarray                      # length n, minimization costs
    cons: list[tuple[int, int, float]]   # (row, col, coef) triplets
    rhs: np.ndarray                      # length m
    sense: list[str]                     # per-row LE/GE/EQ
    lb: np.ndarray                       # length n, -inf allowed
    ub: np.ndarray                       # length n, +inf allowed
    is_int: np.ndarray                   # length n, bool

    @property
    def num_vars(self) -> int:
        return len(self.obj)

    @property
    def num_cons(self) -> int:
        return len(self.rhs)

    @property
    def int_indices(self) -> np.ndarray:
        return np.flatnonzero(self.is_int)

    def dense_matrix(self) -> np.ndarray:
        """Dense m x n constraint matrix (fine at desk scale)."""
        a = np.zeros((self.num_cons, self.num_vars))
        for r, c, v in self.cons:
            a[r, c] = v
        return a

    def row_entries(self) -> list[list[tuple[int, float]]]:
        """Per-row list of (col, coef) pairs."""
        rows: list[list[tuple[int, float]]] = [[] for _ in range(self.num_cons)]
        for r, c, v in self.cons:
            rows[r].append((c, v))
        return rows

    def col_entries(self) -> list[list[tuple[int, float]]]:
        """Per-column list of (row, coef) pairs."""
        cols: list[list[tuple[int, float]]] = [[] for _ in range(self.num_vars)]
        for r, c, v in self.cons:
            cols[c].append((r, v))
        return cols


def make_instance(name, obj, cons, rhs, sense, lb=None, ub=None, is_int=None) -> Instance:
    """Convenience constructor with array coercion and default bounds [0, inf)."""
    obj = np.asarray(obj, dtype=float)
    n = len(obj)
    rhs = np.asarray(rhs, dtype=float)
    if lb is None:
        lb = np.zeros(n)
    if ub is None:
        ub = np.full(n, INF)
    if is_int is None:
        is_int = np.zeros(n, dtype=bool)
    return Instance(
        name=name,
        obj=obj,
        cons=[(int(r), int(c), float(v)) for r, c, v in cons],
        rhs=rhs,
        sense=list(sense),
        lb=np.asarray(lb, dtype=float),
        ub=np.asarray(ub, dtype=float),
        is_int=np.asarray(is_int, dtype=bool),
    )


def binary_instance(name, obj, cons, rhs, sense) -> Instance:
    """All-binary instance: bounds [0,1], every variable integer."""
    n = len(obj)
    return make_instance(name, obj, cons, rhs, sense,
                         lb=np.zeros(n), ub=np.ones(n),
                         is_int=np.ones(n, dtype=bool))


def validate_instance(inst: Instance) -> None:
    """Check all Instance invariants; round integer bounds to integral values.

    Integer variables get lb <- ceil(lb), ub <- floor(ub) in place. Raises
    DuplicateEntry, IndexOutOfRange, EmptyBoundBox, or DimensionMismatch.
    """
    n, m = inst.num_vars, inst.num_cons
    if n < 1:
        raise DimensionMismatch("instance must have at least one variable")
    for arr, label in ((inst.lb, "lb"), (inst.ub, "ub"), (inst.is_int, "is_int")):
        if len(arr) != n:
            raise DimensionMismatch(f"{label} has length {len(arr)}, expected {n}")
    if len(inst.sense) != m:
        raise DimensionMismatch(f"sense has length {len(inst.sense)}, expected {m}")
    for s in inst.sense:
        if s not in SENSES:
            raise DimensionMismatch(f"unknown row sense {s!r}")

    seen: set[tuple[int, int]] = set()
    for r, c, _ in inst.cons:
        if not (0 <= r < m) or not (0 <= c < n):
            raise IndexOutOfRange(f"triplet ({r},{c}) outside {m}x{n}")
        if (r, c) in seen:
            raise DuplicateEntry(r, c)
        seen.add((r, c))

    for j in range(n):
        if inst.is_int[j]:
            if math.isfinite(inst.lb[j]):
                inst.lb[j] = math.ceil(inst.lb[j] - TOL_INT)
            if math.isfinite(inst.ub[j]):
                inst.ub[j] = math.floor(inst.ub[j] + TOL_INT)
        if inst.lb[j] > inst.ub[j]:
            raise EmptyBoundBox(j, inst.lb[j], inst.ub[j])


@dataclass
class LpSolution:
    status: str                    # Optimal | Infeasible | Unbounded | IterLimit
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    iterations: int = 0

    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERLIMIT = "IterLimit"


@dataclass
class MipSolution:
    status: str                    # Optimal | Feasible | Infeasible | Limit
    incumbent: Optional[np.ndarray] = None
    objective: Optional[float] = None
    dual_bound: float = -INF
    nodes: int = 0

    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    LIMIT = "Limit"


@dataclass
class LockCounts:
    nlocksdown: np.ndarray
    nlocksup: np.ndarray


def compute_locks(inst: Instance) -> LockCounts:
    """Count constraints that block moving each variable down/up.

    For a LE row a positive coefficient is an up-lock and a negative one a
    down-lock; GE rows reverse the roles; EQ rows lock both directions.
    The objective contributes nothing.
    """
    down = np.zeros(inst.num_vars, dtype=int)
    up = np.zeros(inst.num_vars, dtype=int)
    for r, c, v in inst.cons:
        if v == 0.0:
            continue
        s = inst.sense[r]
        if s == EQ:
            down[c] += 1
            up[c] += 1
        elif s == LE:
            if v > 0:
                up[c] += 1
            else:
                down[c] += 1
        else:  # GE
            if v > 0:
                down[c] += 1
            else:
                up[c] += 1
    return LockCounts(nlocksdown=down, nlocksup=up)


def check_feasible(inst: Instance, x, tol: float = TOL_FEAS) -> bool:
    """True iff x satisfies every row, bound, and integrality within tol."""
    x = np.asarray(x, dtype=float)
    if len(x) != inst.num_vars:
        raise DimensionMismatch(f"x has length {len(x)}, expected {inst.num_vars}")
    if np.any(x < inst.lb - tol) or np.any(x > inst.ub + tol):
        return False
    row_vals = np.zeros(inst.num_cons)
    for r, c, v in inst.cons:
        row_vals[r] += v * x[c]
    for i, s in enumerate(inst.sense):
        if s == LE and row_vals[i] > inst.rhs[i] + tol:
            return False
        if s == GE and row_vals[i] < inst.rhs[i] - tol:
            return False
        if s == EQ and abs(row_vals[i] - inst.rhs[i]) > tol:
            return False
    ints = inst.int_indices
    if len(ints) and np.any(np.abs(x[ints] - np.round(x[ints])) > tol):
        return False
    return True


def objective_value(inst: Instance, x) -> float:
    return float(np.dot(inst.obj, np.asarray(x, dtype=float)))
