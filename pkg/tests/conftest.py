import numpy as np
import pytest

from dhevo.model import binary_instance, make_instance, validate_instance


@pytest.fixture
def two_var():
    """The worked 2-variable fixture: min -x1-x2, 2x1+2x2 <= 3, binary."""
    inst = binary_instance("two_var", [-1.0, -1.0],
                           [(0, 0, 2.0), (0, 1, 2.0)], [3.0], ["LE"])
    validate_instance(inst)
    return inst


def random_micro_milp(rng: np.random.Generator, max_vars: int = 8,
                      max_rows: int = 6, all_binary: bool = False):
    """Small random MILP with binary/continuous mix and a feasible-ish shape."""
    n = int(rng.integers(2, max_vars + 1))
    m = int(rng.integers(1, max_rows + 1))
    cons = []
    for i in range(m):
        for j in range(n):
            if rng.random() < 0.6:
                cons.append((i, j, float(rng.integers(-4, 5))))
    senses = [("LE", "GE", "EQ")[int(rng.integers(0, 3))] for _ in range(m)]
    rhs = rng.integers(-5, 10, size=m).astype(float)
    if all_binary:
        is_int = np.ones(n, dtype=bool)
        lb, ub = np.zeros(n), np.ones(n)
    else:
        is_int = rng.random(n) < 0.7
        lb = np.zeros(n)
        ub = np.where(is_int, rng.integers(1, 3, n),
                      rng.uniform(1.0, 3.0, n)).astype(float)
    c = rng.integers(-5, 6, size=n).astype(float)
    inst = make_instance(f"micro_{rng.integers(1 << 30)}", c, cons, rhs,
                         senses, lb=lb, ub=ub, is_int=is_int)
    validate_instance(inst)
    return inst
