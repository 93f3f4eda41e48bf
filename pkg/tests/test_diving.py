import numpy as np
import pytest

from dhevo.diving import (
    DiveResult, Scorer, builtin_scorer, default_dmax, dive, program_scorer,
    simple_round,
)
from dhevo.dsl import parse, random_program
from dhevo.errors import UnknownScorer
from dhevo.features import make_feature_vector
from dhevo.model import binary_instance, check_feasible, validate_instance
from dhevo.simplex import solve_lp

from conftest import random_micro_milp


def test_worked_dive_trace(two_var):
    """Frozen fixture: final solution (1,0), objective -1, two LP solves."""
    result = dive(two_var, builtin_scorer("fractional"))
    assert result.terminated_by == DiveResult.INTEGRAL
    assert result.best_objective == pytest.approx(-1.0, abs=1e-9)
    assert result.lp_resolves == 2
    xs = [tuple(np.round(x, 9)) for x, _ in result.solutions]
    assert (1.0, 0.0) in xs


def test_dmax_zero_is_a_no_op(two_var):
    result = dive(two_var, builtin_scorer("fractional"), d_max=0)
    assert result.depth_reached == 0
    assert result.lp_resolves == 0
    assert result.terminated_by == DiveResult.DEPTH_LIMIT


def test_infeasible_root_reports_zero_resolves():
    inst = binary_instance("inf", [1.0], [(0, 0, 1.0)], [2.0], ["GE"])
    validate_instance(inst)
    result = dive(inst, builtin_scorer("fractional"))
    assert result.terminated_by == DiveResult.INFEASIBLE
    assert result.lp_resolves == 0


def test_dive_into_infeasibility_breaks():
    # x1 + x2 >= 1.5, binary: forcing both down empties the polytope.
    inst = binary_instance("ge15", [1.0, 1.0],
                           [(0, 0, 1.0), (0, 1, 1.0)], [1.5], ["GE"])
    validate_instance(inst)
    force_down = Scorer("dsl", lambda fv: (0.0, False))
    result = dive(inst, force_down)
    assert result.terminated_by == DiveResult.INFEASIBLE


def test_default_dmax_formula(two_var):
    assert default_dmax(two_var) == 12          # min(500, 2 + 10)


def test_simple_round_integral_point_returned_unchanged(two_var):
    x = np.array([1.0, 0.0])
    out = simple_round(two_var, x)
    assert np.array_equal(out, x)


def test_simple_round_zero_lock_direction(two_var):
    # x2 = 0.75 fractional; the only zero-lock direction is down.
    out = simple_round(two_var, np.array([1.0, 0.75]))
    assert out is not None
    assert out[1] == 0.0


def test_simple_round_blocked_both_ways():
    inst = binary_instance("eqrow", [1.0, 1.0],
                           [(0, 0, 1.0), (0, 1, 1.0)], [1.0], ["EQ"])
    validate_instance(inst)
    assert simple_round(inst, np.array([0.5, 0.5])) is None


def test_builtin_fractional_formula():
    s = builtin_scorer("fractional")
    score, up = s(make_feature_vector(candsfrac=0.75, candsol=0.75))
    assert score == pytest.approx(-0.25) and up is True
    score, up = s(make_feature_vector(candsfrac=0.5, candsol=2.5))
    assert up is False                       # half rounds down by convention


def test_builtin_coefficient_formula():
    s = builtin_scorer("coefficient")
    score, up = s(make_feature_vector(nlocksdown=0, nlocksup=1,
                                      candsfrac=0.4, candsol=0.4))
    assert score == pytest.approx(0.0) and up is False
    _, up_tie = s(make_feature_vector(nlocksdown=2, nlocksup=2,
                                      candsfrac=0.8, candsol=0.8))
    assert up_tie is True                    # lock tie falls back to fraction


def test_builtin_pseudocost_formula():
    s = builtin_scorer("pseudocost")
    fv = make_feature_vector(candsfrac=0.25, candsol=0.25,
                             pscostdown=2.0, pscostup=1.0)
    score, up = s(fv)
    # down cost 0.5 < up cost 0.75 -> score -0.5, prefer down
    assert score == pytest.approx(-0.5) and up is False


def test_builtin_random_is_seed_stable():
    a = builtin_scorer("random", seed=9)
    b = builtin_scorer("random", seed=9)
    fv = make_feature_vector(candsfrac=0.3, candsol=4.3, obj=2.0)
    assert a(fv) == b(fv)


def test_unknown_scorer_rejected():
    with pytest.raises(UnknownScorer):
        builtin_scorer("farkas")


def test_termination_and_feasibility_property():
    """Dives stay within budget and every recorded solution verifies."""
    rng = np.random.default_rng(77)
    scorers = [builtin_scorer("fractional"), builtin_scorer("coefficient"),
               builtin_scorer("pseudocost"), builtin_scorer("random", seed=1)]
    scorers += [program_scorer(random_program(rng, 4)) for _ in range(4)]
    dives = 0
    for _ in range(25):
        inst = random_micro_milp(rng)
        d_max = default_dmax(inst)
        for scorer in scorers:
            result = dive(inst, scorer, d_max=d_max)
            assert result.lp_resolves <= d_max
            for x, obj in result.solutions:
                assert check_feasible(inst, x, tol=1e-6)
                ints = inst.int_indices
                assert np.all(np.abs(x[ints] - np.round(x[ints])) <= 1e-7)
                assert obj == pytest.approx(float(inst.obj @ x), abs=1e-9)
            if result.solutions:
                assert result.best_objective == pytest.approx(
                    min(o for _, o in result.solutions), abs=1e-12)
            dives += 1
    assert dives == 25 * len(scorers)


def test_monotone_lp_objective_along_dive(two_var):
    """Bound fixing only shrinks the region, so objectives never improve."""
    rng = np.random.default_rng(5)
    for _ in range(15):
        inst = random_micro_milp(rng, all_binary=True)
        root = solve_lp(inst)
        if root.status != "Optimal":
            continue
        result = dive(inst, builtin_scorer("fractional"))
        if result.best_objective is not None:
            assert result.best_objective >= root.objective - 1e-9


def test_adversarial_dsl_scorer_is_contained(two_var):
    # Constant scores with always-up rounding still terminate in budget.
    prog = parse("score: 1 roundup: true")
    result = dive(two_var, program_scorer(prog), d_max=5)
    assert result.lp_resolves <= 5
    assert result.terminated_by in (DiveResult.INTEGRAL, DiveResult.INFEASIBLE,
                                    DiveResult.DEPTH_LIMIT)


def test_fixed_binary_never_repicked():
    """On all-binary instances a fixed variable is integral forever, so the
    dive depth can never exceed the number of integer variables."""
    rng = np.random.default_rng(19)
    for _ in range(20):
        inst = random_micro_milp(rng, all_binary=True)
        result = dive(inst, builtin_scorer("fractional"), d_max=500)
        assert result.depth_reached <= inst.num_vars


def test_dive_deterministic(two_var):
    a = dive(two_var, builtin_scorer("coefficient"))
    b = dive(two_var, builtin_scorer("coefficient"))
    assert a.lp_resolves == b.lp_resolves
    assert a.best_objective == b.best_objective
    assert all(np.array_equal(x1, x2)
               for (x1, _), (x2, _) in zip(a.solutions, b.solutions))
