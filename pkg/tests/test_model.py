import numpy as np
import pytest

from dhevo.errors import DimensionMismatch, DuplicateEntry, EmptyBoundBox, IndexOutOfRange
from dhevo.model import (
    binary_instance, check_feasible, compute_locks, make_instance,
    validate_instance,
)


def test_wellformed_knapsack_validates():
    inst = binary_instance("knap", [-3.0, -2.0], [(0, 0, 2.0), (0, 1, 1.0)],
                           [2.0], ["LE"])
    validate_instance(inst)
    assert inst.num_vars == 2 and inst.num_cons == 1


def test_duplicate_triplet_rejected():
    inst = binary_instance("dup", [1.0, 1.0],
                           [(0, 1, 2.0), (0, 1, 3.0)], [2.0], ["LE"])
    with pytest.raises(DuplicateEntry):
        validate_instance(inst)


def test_triplet_index_out_of_range():
    inst = binary_instance("oob", [1.0], [(0, 3, 1.0)], [1.0], ["LE"])
    with pytest.raises(IndexOutOfRange):
        validate_instance(inst)


def test_integer_bounds_rounded_in_place():
    inst = make_instance("round", [1.0], [], [], [],
                         lb=[0.4], ub=[2.6], is_int=[True])
    validate_instance(inst)
    assert inst.lb[0] == 1.0 and inst.ub[0] == 2.0


def test_integer_rounding_can_empty_the_box():
    inst = make_instance("empty", [1.0], [], [], [],
                         lb=[0.4], ub=[0.6], is_int=[True])
    with pytest.raises(EmptyBoundBox):
        validate_instance(inst)


def test_locks_le_row_positive_coef_is_uplock(two_var):
    locks = compute_locks(two_var)
    assert locks.nlocksup[0] == 1 and locks.nlocksdown[0] == 0
    assert locks.nlocksup[1] == 1 and locks.nlocksdown[1] == 0


def test_locks_equality_row_locks_both_ways():
    inst = make_instance("eq", [0.0, 0.0], [(0, 0, 1.0), (0, 1, -1.0)],
                         [1.0], ["EQ"], lb=[0, 0], ub=[5, 5])
    validate_instance(inst)
    locks = compute_locks(inst)
    assert locks.nlocksup.tolist() == [1, 1]
    assert locks.nlocksdown.tolist() == [1, 1]


def test_locks_absent_variable_has_none():
    inst = make_instance("sparse", [0.0, 0.0], [(0, 0, 1.0)], [1.0], ["LE"],
                         lb=[0, 0], ub=[1, 1])
    validate_instance(inst)
    locks = compute_locks(inst)
    assert locks.nlocksdown[1] == 0 and locks.nlocksup[1] == 0


def test_locks_ge_row_reverses_roles():
    inst = make_instance("ge", [0.0], [(0, 0, 2.0)], [1.0], ["GE"],
                         lb=[0], ub=[5])
    validate_instance(inst)
    locks = compute_locks(inst)
    assert locks.nlocksdown[0] == 1 and locks.nlocksup[0] == 0


def test_check_feasible_substitution(two_var):
    assert check_feasible(two_var, [1.0, 0.0])
    assert not check_feasible(two_var, [1.0, 1.0])     # 2+2 > 3
    assert not check_feasible(two_var, [0.5, 0.0])     # integrality


def test_check_feasible_dimension_mismatch(two_var):
    with pytest.raises(DimensionMismatch):
        check_feasible(two_var, [1.0])


def test_lock_soundness_by_perturbation():
    """Zero down-locks means decreasing the variable can never break a row."""
    rng = np.random.default_rng(5)
    from conftest import random_micro_milp
    from dhevo.model import TOL_FEAS

    checked = 0
    for _ in range(120):
        inst = random_micro_milp(rng)
        locks = compute_locks(inst)
        a = inst.dense_matrix()
        x = rng.uniform(inst.lb, np.minimum(inst.ub, inst.lb + 2.0))
        rows = a @ x
        for j in range(inst.num_vars):
            if locks.nlocksdown[j] != 0 or x[j] - 0.5 < inst.lb[j]:
                continue
            x2 = x.copy()
            x2[j] -= 0.5
            rows2 = a @ x2
            for i, sense in enumerate(inst.sense):
                if sense == "LE" and rows[i] <= inst.rhs[i] + TOL_FEAS:
                    assert rows2[i] <= inst.rhs[i] + TOL_FEAS
                if sense == "GE" and rows[i] >= inst.rhs[i] - TOL_FEAS:
                    assert rows2[i] >= inst.rhs[i] - TOL_FEAS
            checked += 1
    assert checked > 50
