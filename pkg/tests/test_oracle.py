from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from inicalc.evaluator import UnsupportedType, eval_ini
from inicalc.models import Dist, PSet, get_model
from inicalc.oracle import (
    NotAPairSupport, check_factorization, check_tensor_soundness_i, check_tensor_soundness_ini,
    marginals, report_to_json,
)
from inicalc.parser import parse_term
from inicalc.syntax import Layer
from inicalc.values import FF, TT, PairV

DIST, PSETM, NAME = get_model("dist"), get_model("pset"), get_model("name")
H, Q = Fraction(1, 2), Fraction(1, 4)


def test_correlated_pair_is_flagged_with_zero_vs_quarter():
    joint = eval_ini(DIST, {}, parse_term("let x = coin in (x, x)"))
    r = check_factorization(DIST, joint)
    assert not r.is_product
    assert r.witness == (PairV(TT, FF), Fraction(0), Q)
    assert r.marginal1.as_dict() == {TT: H, FF: H}
    js = report_to_json(DIST, r)
    assert js["witness"] == {"pair": "(tt,ff)", "joint": "0/1", "product": "1/4"}


def test_two_coins_factorize():
    r = check_tensor_soundness_ini(DIST, parse_term("coin (x) coin"))
    assert r.is_product and r.witness is None


def test_non_tensor_rejected():
    with pytest.raises(UnsupportedType):
        check_tensor_soundness_ini(DIST, parse_term("(coin, coin)"))


def test_not_a_pair_support():
    with pytest.raises(NotAPairSupport):
        marginals(PSETM, PSet([TT]))


def test_hand_built_correlation_is_detected():
    # P(tt,tt) = 1/2, P(tt,ff) = 0, P(ff,tt) = 1/4, P(ff,ff) = 1/4: marginals 1/2 and 3/4
    joint = Dist([(PairV(TT, TT), H), (PairV(FF, TT), Q), (PairV(FF, FF), Q)])
    r = check_factorization(DIST, joint)
    assert not r.is_product
    assert r.witness == (PairV(TT, FF), 0, Fraction(1, 8))


probs = st.fractions(min_value=0, max_value=1, max_denominator=12)


@given(probs, probs)
def test_products_of_bernoullis_factorize(p, q):
    a = Dist([(TT, p), (FF, 1 - p)])
    b = Dist([(TT, q), (FF, 1 - q)])
    assert check_factorization(DIST, DIST.pair_product(a, b)).is_product


@given(st.fractions(min_value=Fraction(1, 10), max_value=Fraction(9, 10), max_denominator=10))
def test_diagonal_never_factorizes(p):
    joint = Dist([(PairV(TT, TT), p), (PairV(FF, FF), 1 - p)])
    assert not check_factorization(DIST, joint).is_product


def test_pset_product_and_non_product():
    assert check_factorization(PSETM, PSETM.pair_product(PSet([TT, FF]), PSet([TT]))).is_product
    diag = PSet([PairV(TT, TT), PairV(FF, FF)])
    r = check_factorization(PSETM, diag)
    assert not r.is_product and r.witness[0] in (PairV(TT, FF), PairV(FF, TT))


def test_name_sharing_is_flagged():
    fresh = NAME.prim("fresh")
    shared = NAME.bind(fresh, lambda n: NAME.unit(PairV(n, n)))
    r = check_factorization(NAME, shared)
    assert not r.is_product and r.disjoint is False
    apart = NAME.pair_product(fresh, fresh)
    r2 = check_factorization(NAME, apart)
    assert r2.is_product and r2.disjoint and r2.recombines


@pytest.mark.parametrize("mid,src", [
    ("dist", "(sample as in coin) (x) (sample as in not coin)"),
    ("pset", "(sample as in amb) (x) (sample as in (amb, amb))"),
    ("name", "(sample as in fresh) (x) (sample as in fresh)"),
])
def test_i_soundness_per_model(mid, src):
    r = check_tensor_soundness_i(get_model(mid), parse_term(src, Layer.I))
    assert r.is_product and r.notes["erased_equals_product"]


def test_i_soundness_requires_boxes():
    with pytest.raises(UnsupportedType):
        check_tensor_soundness_i(DIST, parse_term("sample as in coin", Layer.I))
