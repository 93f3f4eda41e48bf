import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dhevo.errors import NonMonotoneTrace
from dhevo.metrics import (
    BoundEvent, diversity_index, primal_dual_gap, primal_dual_integral,
    primal_gap, summarize,
)


def test_primal_gap_identical_is_zero():
    assert primal_gap(-1.0, -1.0) == 0.0


def test_primal_gap_substitution():
    assert primal_gap(110.0, 100.0) == pytest.approx(0.1)


def test_primal_gap_zero_reference_uses_absolute_form():
    assert primal_gap(0.3, 0.0) == pytest.approx(0.3)


def test_primal_dual_gap_equal_is_zero():
    assert primal_dual_gap(7.0, 7.0) == 0.0


def test_primal_dual_gap_substitution():
    assert primal_dual_gap(10.0, 8.0) == pytest.approx(0.2)


def test_primal_dual_gap_opposite_signs_is_one():
    assert primal_dual_gap(5.0, -3.0) == 1.0


def test_primal_dual_gap_infinite_is_one():
    assert primal_dual_gap(math.inf, 3.0) == 1.0
    assert primal_dual_gap(3.0, -math.inf) == 1.0


@given(z=st.floats(-1e9, 1e9), z_star=st.floats(-1e9, 1e9))
@settings(max_examples=300, deadline=None)
def test_primal_dual_gap_symmetric_and_bounded(z, z_star):
    g = primal_dual_gap(z, z_star)
    assert 0.0 <= g <= 1.0
    assert g == primal_dual_gap(z_star, z)


def test_pdi_piecewise_fixture():
    trace = [BoundEvent(time=2.0, primal=5.0, dual=5.0)]
    assert primal_dual_integral(trace, 5.0) == pytest.approx(2.0, abs=1e-12)


def test_pdi_gap_zero_from_time_zero():
    trace = [BoundEvent(time=0.0, primal=3.0, dual=3.0)]
    assert primal_dual_integral(trace, 5.0) == 0.0


def test_pdi_empty_trace_is_t_end():
    assert primal_dual_integral([], 3.0) == 3.0


def test_pdi_nonmonotone_times_rejected():
    trace = [BoundEvent(time=2.0, primal=5.0, dual=1.0),
             BoundEvent(time=1.0, primal=4.0, dual=1.0)]
    with pytest.raises(NonMonotoneTrace):
        primal_dual_integral(trace, 5.0)


def test_pdi_regressing_bounds_rejected():
    trace = [BoundEvent(time=1.0, primal=4.0, dual=1.0),
             BoundEvent(time=2.0, primal=5.0, dual=1.0)]
    with pytest.raises(NonMonotoneTrace):
        primal_dual_integral(trace, 5.0)


def test_pdi_nondecreasing_in_t_end():
    trace = [BoundEvent(time=1.0, primal=6.0, dual=2.0),
             BoundEvent(time=3.0, primal=5.0, dual=4.0)]
    values = [primal_dual_integral(trace, t) for t in (3.0, 4.0, 6.0)]
    assert values == sorted(values)
    assert values[-1] <= 6.0


def test_diversity_one_per_bin_fixture():
    # Two samples, two bins, one sample each: H = 1 bit = log2(2) -> DI = 1.
    assert diversity_index([0.0, 1.0]) == pytest.approx(1.0, abs=1e-12)


def test_diversity_constant_scores_zero():
    assert diversity_index([4.2] * 10) == 0.0


def test_diversity_single_sample_zero():
    assert diversity_index([3.0]) == 0.0


def test_diversity_verified_against_independent_entropy():
    # {1,1,2,3} with ceil(sqrt(4)) = 2 equal-width bins over [1,3]:
    # [1,2) holds {1,1}, [2,3] holds {2,3} -> counts (2,2).
    # Independent check: H = -sum(p log2 p) with p = (1/2, 1/2) = 1 bit,
    # DI = 1 / log2(4) = 0.5.
    counts = np.histogram([1.0, 1.0, 2.0, 3.0], bins=2, range=(1.0, 3.0))[0]
    assert counts.tolist() == [2, 2]
    p = counts / counts.sum()
    h_independent = float(-(p * np.log2(p)).sum())
    assert diversity_index([1.0, 1.0, 2.0, 3.0]) == pytest.approx(
        h_independent / math.log2(4), abs=1e-12)


def test_diversity_in_unit_interval_and_permutation_invariant():
    rng = np.random.default_rng(12)
    for _ in range(300):
        scores = rng.normal(size=int(rng.integers(1, 40))).tolist()
        di = diversity_index(scores)
        assert 0.0 <= di <= 1.0
        shuffled = list(scores)
        rng.shuffle(shuffled)
        assert diversity_index(shuffled) == pytest.approx(di, abs=1e-12)


def test_summarize_singleton():
    assert summarize([5.0]) == {"mean": 5.0, "variance": 0.0, "std_error": 0.0}


def test_summarize_hand_computation():
    out = summarize([1.0, 3.0])
    assert out["mean"] == 2.0 and out["variance"] == 2.0 and out["std_error"] == 1.0


def test_summarize_order_invariant():
    a = summarize([3.0, 1.0, 4.0, 1.0, 5.0])
    b = summarize([5.0, 4.0, 3.0, 1.0, 1.0])
    assert a == b


def test_summarize_matches_two_pass_variance():
    rng = np.random.default_rng(9)
    for _ in range(50):
        xs = rng.normal(size=int(rng.integers(2, 30))).tolist()
        out = summarize(xs)
        mean = sum(xs) / len(xs)
        var = sum((x - mean) ** 2 for x in xs) / (len(xs) - 1)
        assert out["variance"] == pytest.approx(var, abs=1e-12)
        assert out["std_error"] == pytest.approx(math.sqrt(var / len(xs)), abs=1e-12)
