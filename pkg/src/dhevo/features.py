"""Per-variable diving features and pseudocost bookkeeping.

The thirteen features describe one fractional integer variable in the
current LP relaxation: rounding safety (locks), fractionality, objective
data, pseudocosts, the root-relaxation value, and column shape. Scoring
functions, built-in or generated, see exactly this record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotFractional
from .model import Instance, LockCounts, TOL_INT

FEATURE_NAMES = (
    "mayrounddown", "mayroundup", "candsfrac", "candsol",
    "nlocksdown", "nlocksup", "obj", "objnorm",
    "pscostdown", "pscostup", "rootsolval", "nNonz", "isBinary",
)
NUMERIC_FEATURES = (
    "candsfrac", "candsol", "nlocksdown", "nlocksup", "obj", "objnorm",
    "pscostdown", "pscostup", "rootsolval", "nNonz",
)
BOOLEAN_FEATURES = ("mayrounddown", "mayroundup", "isBinary")


@dataclass(frozen=True)
class FeatureVector:
    mayrounddown: bool
    mayroundup: bool
    candsfrac: float
    candsol: float
    nlocksdown: int
    nlocksup: int
    obj: float
    objnorm: float
    pscostdown: float
    pscostup: float
    rootsolval: float
    nNonz: int
    isBinary: bool

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in FEATURE_NAMES}


class PseudocostState:
    """Running average of objective change per unit bound move, per direction."""

    def __init__(self, num_vars: int):
        self.down_sum = np.zeros(num_vars)
        self.down_count = np.zeros(num_vars, dtype=int)
        self.up_sum = np.zeros(num_vars)
        self.up_count = np.zeros(num_vars, dtype=int)

    def update(self, j: int, roundup: bool, cost_per_unit: float) -> None:
        if roundup:
            self.up_sum[j] += cost_per_unit
            self.up_count[j] += 1
        else:
            self.down_sum[j] += cost_per_unit
            self.down_count[j] += 1

    def down(self, j: int) -> float:
        c = self.down_count[j]
        return float(self.down_sum[j] / c) if c > 0 else 0.0

    def up(self, j: int) -> float:
        c = self.up_count[j]
        return float(self.up_sum[j] / c) if c > 0 else 0.0


def is_binary_var(inst: Instance, j: int) -> bool:
    return bool(inst.is_int[j] and inst.lb[j] == 0.0 and inst.ub[j] == 1.0)


def extract_features(inst: Instance, lp_x: np.ndarray,
                     root_x, locks: LockCounts,
                     pscost: PseudocostState, j: int,
                     col_nnz=None) -> FeatureVector:
    """Feature record for fractional integer variable j at LP solution lp_x.

    root_x may be None (root relaxation unavailable), in which case the
    root value feature is zero. Raises NotFractional for non-candidates.
    """
    if not inst.is_int[j]:
        raise NotFractional(j)
    val = float(lp_x[j])
    frac = val - math.floor(val)
    if min(frac, 1.0 - frac) <= TOL_INT:
        raise NotFractional(j)
    if col_nnz is None:
        col_nnz = sum(1 for _, c, v in inst.cons if c == j and v != 0.0)
    return FeatureVector(
        mayrounddown=bool(locks.nlocksdown[j] == 0),
        mayroundup=bool(locks.nlocksup[j] == 0),
        candsfrac=frac,
        candsol=val,
        nlocksdown=int(locks.nlocksdown[j]),
        nlocksup=int(locks.nlocksup[j]),
        obj=float(inst.obj[j]),
        objnorm=float(np.linalg.norm(inst.obj)),
        pscostdown=pscost.down(j),
        pscostup=pscost.up(j),
        rootsolval=float(root_x[j]) if root_x is not None else 0.0,
        nNonz=int(col_nnz),
        isBinary=is_binary_var(inst, j),
    )


def make_feature_vector(candsfrac: float = 0.5, candsol=None,
                        nlocksdown: int = 1, nlocksup: int = 1,
                        obj: float = 0.0, objnorm: float = 1.0,
                        pscostdown: float = 0.0, pscostup: float = 0.0,
                        rootsolval: float = 0.0, nNonz: int = 1,
                        isBinary: bool = True) -> FeatureVector:
    """Internally consistent FeatureVector for tests and probe evaluation."""
    if candsol is None:
        candsol = candsfrac
    return FeatureVector(
        mayrounddown=nlocksdown == 0,
        mayroundup=nlocksup == 0,
        candsfrac=candsfrac,
        candsol=candsol,
        nlocksdown=nlocksdown,
        nlocksup=nlocksup,
        obj=obj,
        objnorm=objnorm,
        pscostdown=pscostdown,
        pscostup=pscostup,
        rootsolval=rootsolval,
        nNonz=nNonz,
        isBinary=isBinary,
    )


def probe_vectors() -> list[FeatureVector]:
    """Eight fixed probes: all rounding-safety corners, fractions off-center
    and at one half, binary and general integer flavors."""
    probes = []
    fracs = (0.01, 0.5, 0.99)
    corners = [(0, 0, True), (0, 2, True), (3, 0, True), (1, 1, True),
               (0, 0, False), (0, 4, False), (2, 0, False), (5, 3, False)]
    for i, (down, up, binary) in enumerate(corners):
        frac = fracs[i % 3]
        probes.append(make_feature_vector(
            candsfrac=frac,
            candsol=frac if binary else 2.0 + frac,
            nlocksdown=down, nlocksup=up,
            obj=(-1.0) ** i * (i + 1.0), objnorm=3.5,
            pscostdown=0.25 * i, pscostup=4.0 - 0.5 * i,
            rootsolval=0.0 if i < 4 else 1.5,
            nNonz=i + 1, isBinary=binary,
        ))
    return probes
