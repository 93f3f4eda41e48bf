import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dhevo.dsl import (
    CLAMP, MAX_DEPTH, MAX_NODES, Program, crossover, eval_program, mutate,
    parse, random_program, render,
)
from dhevo.dsl.nodes import children, depth
from dhevo.errors import DslTypeError, LimitExceeded, ParseError, UnknownIdentifier
from dhevo.features import make_feature_vector


def test_parse_counts_feature_references():
    p = parse("score: candsfrac * 80  roundup: candsfrac > 0.5")
    def names(node):
        from dhevo.dsl.nodes import Feature
        out = [node.name] if isinstance(node, Feature) else []
        for c in children(node):
            out += names(c)
        return out
    assert names(p.score) + names(p.roundup) == ["candsfrac", "candsfrac"]


def test_eval_hand_arithmetic():
    p = parse("score: candsfrac * 80  roundup: candsfrac > 0.5")
    out = eval_program(p, make_feature_vector(candsfrac=0.75, candsol=0.75))
    assert out.score == pytest.approx(60.0) and out.roundup is True


def test_bool_in_arithmetic_is_type_error():
    with pytest.raises(DslTypeError):
        parse("score: mayroundup + 1 roundup: true")


def test_numeric_roundup_is_type_error():
    with pytest.raises(DslTypeError):
        parse("score: 1 roundup: candsfrac")


def test_unmatched_paren_position():
    with pytest.raises(ParseError) as err:
        parse("score: (1")
    assert err.value.line == 1 and err.value.col >= 9


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier):
        parse("score: wibble roundup: true")


def test_total_division_by_zero():
    p = parse("score: obj / 0 roundup: false")
    assert eval_program(p, make_feature_vector(obj=5.0)).score == 0.0


def test_near_zero_division_is_zero():
    p = parse("score: 1 / candsfrac roundup: false")
    out = eval_program(p, make_feature_vector(candsfrac=1e-12, candsol=1e-12))
    assert out.score == 0.0


def test_if_branch_selection():
    p = parse("score: if(isBinary, 1, 0) roundup: isBinary")
    out = eval_program(p, make_feature_vector(isBinary=True))
    assert out.score == 1.0 and out.roundup is True
    out = eval_program(p, make_feature_vector(isBinary=False))
    assert out.score == 0.0 and out.roundup is False


def test_clamping_bounds_all_results():
    p = parse("score: 1e11 * 1e11 roundup: false")
    assert eval_program(p, make_feature_vector()).score == CLAMP


def test_roundtrip_spec_example():
    p = parse("score: candsfrac * 80  roundup: candsfrac > 0.5")
    q = parse(render(p))
    assert q.score == p.score and q.roundup == p.roundup


def test_nested_if_renders_with_parens():
    p = parse("score: if(candsfrac > 0.5, if(isBinary, 2, 1), -3) roundup: not isBinary")
    q = parse(render(p))
    assert q.score == p.score and q.roundup == p.roundup


def test_render_deterministic():
    p = parse("score: min(obj, 2.5) + abs(candsol) roundup: true and not isBinary")
    assert render(p) == render(p)


def test_roundtrip_1000_random_programs():
    rng = np.random.default_rng(101)
    for _ in range(1000):
        p = random_program(rng, max_depth=int(rng.integers(1, 7)))
        q = parse(render(p))
        assert q.score == p.score and q.roundup == p.roundup


def test_eval_totality_10000_pairs():
    rng = np.random.default_rng(55)
    programs = [random_program(rng, max_depth=int(rng.integers(1, 7)))
                for _ in range(200)]
    for i in range(10_000):
        p = programs[i % len(programs)]
        fv = make_feature_vector(
            candsfrac=float(rng.uniform(1e-9, 1 - 1e-9)),
            candsol=float(rng.uniform(-50, 50)),
            nlocksdown=int(rng.integers(0, 9)),
            nlocksup=int(rng.integers(0, 9)),
            obj=float(rng.uniform(-1e6, 1e6)),
            objnorm=float(rng.uniform(0, 1e6)),
            pscostdown=float(rng.uniform(-1e3, 1e3)),
            pscostup=float(rng.uniform(-1e3, 1e3)),
            rootsolval=float(rng.uniform(-50, 50)),
            nNonz=int(rng.integers(0, 1000)),
            isBinary=bool(rng.integers(0, 2)),
        )
        out = eval_program(p, fv)
        assert math.isfinite(out.score) and abs(out.score) <= CLAMP
        assert isinstance(out.roundup, bool)


@given(frac=st.floats(0, 0.999999), obj=st.floats(-1e9, 1e9),
       norm=st.floats(0, 1e9), ps=st.floats(-1e6, 1e6))
@settings(max_examples=200, deadline=None)
def test_eval_totality_hypothesis(frac, obj, norm, ps):
    p = parse("score: (obj / objnorm) * candsfrac - pscostdown / (pscostup + 0.1) "
              "roundup: pscostup * (1 - candsfrac) < pscostdown * candsfrac")
    fv = make_feature_vector(candsfrac=frac, candsol=frac, obj=obj,
                             objnorm=norm, pscostdown=ps, pscostup=-ps)
    out = eval_program(p, fv)
    assert math.isfinite(out.score)


def _diff_sites(a, b):
    """Number of maximal divergent subtrees between two ASTs."""
    if a == b:
        return 0
    ca, cb = children(a), children(b)
    if type(a) is not type(b) or len(ca) != len(cb):
        return 1
    shallow_equal = (
        getattr(a, "op", None) == getattr(b, "op", None)
        and getattr(a, "fn", None) == getattr(b, "fn", None)
        and getattr(a, "value", None) == getattr(b, "value", None)
        and getattr(a, "name", None) == getattr(b, "name", None))
    if not shallow_equal:
        return 1
    return sum(_diff_sites(x, y) for x, y in zip(ca, cb))


def test_mutation_single_edit_site():
    rng = np.random.default_rng(303)
    for _ in range(300):
        p = random_program(rng, max_depth=int(rng.integers(2, 6)))
        m = mutate(p, rng)
        sites = _diff_sites(p.score, m.score) + _diff_sites(p.roundup, m.roundup)
        assert sites == 1


def test_mutation_deterministic_under_seed():
    p = parse("score: candsfrac * 80 + obj roundup: candsfrac > 0.5")
    m1 = mutate(p, np.random.default_rng(9))
    m2 = mutate(p, np.random.default_rng(9))
    assert render(m1) == render(m2)


def test_mutation_closure_1000_trials():
    rng = np.random.default_rng(404)
    p = random_program(rng, max_depth=4)
    for _ in range(1000):
        p = mutate(p, rng)
        q = parse(render(p))         # parses and typechecks
        assert q.score == p.score and q.roundup == p.roundup
        assert p.size() <= MAX_NODES
        assert max(depth(p.score), depth(p.roundup)) <= MAX_DEPTH


def test_crossover_self_is_semantically_identity():
    rng = np.random.default_rng(21)
    p = parse("score: max(candsfrac, obj) - nlocksup roundup: mayroundup or isBinary")
    child = crossover(p, p, rng)
    probes = [make_feature_vector(candsfrac=f, nlocksup=u, obj=o)
              for f in (0.1, 0.9) for u in (0, 3) for o in (-2.0, 5.0)]
    for fv in probes:
        assert eval_program(child, fv) == eval_program(p, fv)


def test_crossover_deterministic():
    rng_a, rng_b = np.random.default_rng(33), np.random.default_rng(33)
    p = parse("score: candsfrac roundup: true")
    q = parse("score: obj * 2 roundup: isBinary")
    assert render(crossover(p, q, rng_a)) == render(crossover(p, q, rng_b))


def test_crossover_respects_node_cap():
    rng = np.random.default_rng(66)
    big = random_program(rng, max_depth=8)
    for _ in range(200):
        other = random_program(rng, max_depth=8)
        child = crossover(big, other, rng)
        assert child.size() <= MAX_NODES
        big = child


def test_random_program_depth_one_is_leaf():
    rng = np.random.default_rng(13)
    for _ in range(50):
        p = random_program(rng, max_depth=1)
        assert children(p.score) == () and children(p.roundup) == ()


def test_random_program_1000_all_typecheck():
    rng = np.random.default_rng(707)
    for _ in range(1000):
        p = random_program(rng, max_depth=int(rng.integers(1, 7)))
        assert Program.create(p.score, p.roundup) is not None


def test_random_program_reproducible():
    a = random_program(np.random.default_rng(1), max_depth=5)
    b = random_program(np.random.default_rng(1), max_depth=5)
    assert render(a) == render(b)


def test_depth_cap_enforced():
    deep = "score: " + "abs(" * 30 + "obj" + ")" * 30 + " roundup: true"
    with pytest.raises(LimitExceeded):
        parse(deep)


def test_node_cap_enforced():
    wide = "score: " + " + ".join(["candsfrac"] * 600) + " roundup: true"
    with pytest.raises(LimitExceeded):
        parse(wide)
