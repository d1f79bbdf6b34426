from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from inicalc.evaluator import EvalError, UnsupportedType, eval_erased, eval_i, eval_ini, eval_ni
from inicalc.generate import GenConfig, generate_terms
from inicalc.models import Dist, PSet, get_model
from inicalc.parser import parse_term, parse_type
from inicalc.syntax import Layer
from inicalc.values import FF, TT, MonV, PairV

from ref_eval import distribution, package_dist

H = Fraction(1, 2)
DIST = get_model("dist")


def ini(src, model=DIST):
    return eval_ini(model, {}, parse_term(src))


def test_coin():
    assert ini("coin").as_dict() == {TT: H, FF: H}


def test_correlated_pair():
    assert ini("let x = coin in (x, x)").as_dict() == {PairV(TT, TT): H, PairV(FF, FF): H}


def test_independent_pair():
    q = Fraction(1, 4)
    assert ini("coin (x) coin").as_dict() == {PairV(a, b): q for a in (TT, FF) for b in (TT, FF)}


def test_argument_is_evaluated_once():
    # call by value: the argument's coin is flipped before the body runs
    d = ini("(fn v: Bool => (v, v)) coin")
    assert d.as_dict() == {PairV(TT, TT): H, PairV(FF, FF): H}


def test_function_body_effect_runs_at_call():
    assert ini("let f = fn u: Bool => coin in f true").as_dict() == {TT: H, FF: H}


def test_environment_is_sampled():
    env = {"x": DIST.prim("coin")}
    assert eval_ini(DIST, env, parse_term("(x, x)")).as_dict() == {PairV(TT, TT): H, PairV(FF, FF): H}


def test_ni_pset_and_ops():
    p = get_model("pset")
    out = eval_ni(p, {}, parse_term("let x = amb in (x, xor (x, amb))", Layer.NI))
    assert out == PSet(PairV(a, b) for a in (TT, FF) for b in (TT, FF))


def test_ni_names():
    n = get_model("name")
    out = eval_ni(n, {}, parse_term("let a = fresh in let b = fresh in (eqn (a, a), eqn (a, b))", Layer.NI))
    assert out.observe().payload == PairV(TT, FF)


def test_eval_i_sample():
    env = {"dist": MonV(DIST.prim("coin"))}
    t = parse_term("sample dist as x in (if x then (true, true) else (false, false))", Layer.I)
    v = eval_i(DIST, env, t)
    assert isinstance(v, MonV)
    assert v.comp.as_dict() == {PairV(TT, TT): H, PairV(FF, FF): H}
    assert eval_erased(DIST, env, t).as_dict() == v.comp.as_dict()


def test_eval_i_tensor_is_plain_pair():
    v = eval_i(DIST, {}, parse_term("(sample as in coin) (x) (sample as in true)", Layer.I))
    assert isinstance(v, PairV) and v.right.comp == Dist.point(TT)


def test_erased_tensor_is_product():
    t = parse_term("(sample as in coin) (x) (sample as in coin)", Layer.I)
    q = Fraction(1, 4)
    assert eval_erased(DIST, {}, t).as_dict() == {PairV(a, b): q for a in (TT, FF) for b in (TT, FF)}


def test_erased_rejects_arrow_types():
    with pytest.raises(UnsupportedType):
        eval_erased(DIST, {}, parse_term("fn d: M Bool => d", Layer.I), parse_type("M Bool -o M Bool"))


def test_missing_primitive():
    with pytest.raises(EvalError) as e:
        eval_ni(get_model("pset"), {}, parse_term("coin", Layer.NI))
    assert e.value.kind == "PrimUnknown"


def test_sample_arities_agree_with_nesting():
    three = parse_term("sample (sample as in coin), (sample as in coin), (sample as in not coin) "
                       "as a, b, c in and (a, or (b, c))", Layer.I)
    assert eval_i(DIST, {}, three).comp.as_dict() == {TT: Fraction(3, 8), FF: Fraction(5, 8)}


# the reference evaluator enumerates paths independently; both must agree

@pytest.mark.parametrize("seed", range(4))
def test_ini_matches_reference(seed):
    for t in generate_terms(GenConfig(max_depth=5, seed=seed, layer=Layer.INI, count=60,
                                      target_type=parse_type("Bool (x) (Bool * Bool)"))):
        assert package_dist(eval_ini(DIST, {}, t)) == distribution(t)


@given(st.integers(0, 10**6))
def test_ni_matches_reference(seed):
    for t in generate_terms(GenConfig(max_depth=5, seed=seed, layer=Layer.NI, count=3,
                                      target_type=parse_type("Bool * (Bool + Bool)"))):
        assert package_dist(eval_ni(DIST, {}, t)) == distribution(t)


@given(st.integers(0, 10**6))
def test_erased_matches_reference(seed):
    for t in generate_terms(GenConfig(max_depth=5, seed=seed, layer=Layer.I, count=3,
                                      target_type=parse_type("M Bool (x) M (Bool * Bool)"))):
        assert package_dist(eval_erased(DIST, {}, t)) == distribution(t)
