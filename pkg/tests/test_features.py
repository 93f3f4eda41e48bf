import math

import numpy as np
import pytest

from dhevo.errors import NotFractional
from dhevo.features import (
    BOOLEAN_FEATURES, FEATURE_NAMES, NUMERIC_FEATURES, PseudocostState,
    extract_features, probe_vectors,
)
from dhevo.model import compute_locks


def test_feature_name_partition():
    assert len(FEATURE_NAMES) == 13
    assert set(NUMERIC_FEATURES) | set(BOOLEAN_FEATURES) == set(FEATURE_NAMES)
    assert len(NUMERIC_FEATURES) == 10 and len(BOOLEAN_FEATURES) == 3


def test_extraction_matches_hand_evaluation(two_var):
    # LP point (0.75, 0.75) taken as given; all 13 fields hand-checked.
    locks = compute_locks(two_var)
    ps = PseudocostState(2)
    x = np.array([0.75, 0.75])
    fv = extract_features(two_var, x, x, locks, ps, 0)
    assert fv.candsfrac == pytest.approx(0.75)
    assert fv.candsol == pytest.approx(0.75)
    assert fv.nlocksup == 1 and fv.nlocksdown == 0
    assert fv.mayrounddown is True and fv.mayroundup is False
    assert fv.obj == -1.0
    assert fv.objnorm == pytest.approx(math.sqrt(2.0))
    assert fv.rootsolval == pytest.approx(0.75)
    assert fv.nNonz == 1
    assert fv.isBinary is True


def test_fresh_pseudocosts_are_zero(two_var):
    locks = compute_locks(two_var)
    fv = extract_features(two_var, np.array([0.5, 0.5]), None, locks,
                          PseudocostState(2), 1)
    assert fv.pscostdown == 0.0 and fv.pscostup == 0.0
    assert fv.rootsolval == 0.0      # no root relaxation available


def test_integral_variable_rejected(two_var):
    locks = compute_locks(two_var)
    with pytest.raises(NotFractional):
        extract_features(two_var, np.array([1.0, 0.5]), None, locks,
                         PseudocostState(2), 0)


def test_continuous_variable_rejected(two_var):
    relaxed = two_var
    relaxed.is_int[0] = False
    locks = compute_locks(relaxed)
    with pytest.raises(NotFractional):
        extract_features(relaxed, np.array([0.5, 0.5]), None, locks,
                         PseudocostState(2), 0)


def test_pseudocost_running_average():
    ps = PseudocostState(3)
    ps.update(1, True, 4.0)
    ps.update(1, True, 2.0)
    ps.update(1, False, 1.0)
    assert ps.up(1) == pytest.approx(3.0)
    assert ps.down(1) == pytest.approx(1.0)
    assert ps.up(0) == 0.0


def test_feature_vector_invariants_hold_during_dives():
    """The consistency rules hold at every extraction in real dives."""
    from conftest import random_micro_milp
    from dhevo.model import LpSolution
    from dhevo.simplex import solve_lp

    rng = np.random.default_rng(31)
    seen = 0
    for _ in range(250):
        if seen > 20:
            break
        inst = random_micro_milp(rng)
        lp = solve_lp(inst)
        if lp.status != LpSolution.OPTIMAL:
            continue
        locks = compute_locks(inst)
        ps = PseudocostState(inst.num_vars)
        for j in inst.int_indices:
            frac = lp.x[j] - math.floor(lp.x[j])
            if min(frac, 1 - frac) <= 1e-7:
                continue
            fv = extract_features(inst, lp.x, lp.x, locks, ps, int(j))
            assert 0.0 <= fv.candsfrac < 1.0
            assert fv.candsfrac == pytest.approx(
                fv.candsol - math.floor(fv.candsol), abs=1e-7)
            assert fv.mayrounddown == (fv.nlocksdown == 0)
            assert fv.mayroundup == (fv.nlocksup == 0)
            assert fv.objnorm == pytest.approx(
                float(np.linalg.norm(inst.obj)), abs=1e-12)
            seen += 1
    assert seen > 20


def test_probe_vectors_are_consistent_and_cover_corners():
    probes = probe_vectors()
    assert len(probes) == 8
    fracs = {p.candsfrac for p in probes}
    assert {0.01, 0.5, 0.99} <= fracs
    corners = {(p.mayrounddown, p.mayroundup) for p in probes}
    assert corners == {(True, True), (True, False), (False, True),
                       (False, False)}
    for p in probes:
        assert p.mayrounddown == (p.nlocksdown == 0)
        assert p.mayroundup == (p.nlocksup == 0)
