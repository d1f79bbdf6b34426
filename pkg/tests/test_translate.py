import pytest
from hypothesis import given, strategies as st

from inicalc.checker import check_i, check_ni
from inicalc.models import get_model
from inicalc.parser import parse_term, parse_type, pretty
from inicalc.suites import abstraction_pairs, fragment_terms
from inicalc.translate import (
    Fragment, NotInFragment, check_full_abstraction, check_translation, classify_fragment,
    denote_source, denote_target, preserves_semantics, translate_t, translate_t_prime,
    type_t, type_t_prime,
)

DIST = get_model("dist")
AF, MU = Fragment.ArrowFree, Fragment.Multiplicative


def test_types():
    assert type_t(parse_type("Bool (x) (Bool * Bool)")) == parse_type("Bool * (Bool * Bool)")
    assert type_t_prime(parse_type("Bool (x) Bool -o Bool")) == parse_type("M Bool (x) M Bool -o M Bool")
    with pytest.raises(NotInFragment):
        type_t(parse_type("Bool -o Bool"))
    with pytest.raises(NotInFragment):
        type_t_prime(parse_type("Bool * Bool"))


def test_classify():
    assert classify_fragment(parse_term("coin (x) coin")) == {AF, MU}
    assert classify_fragment(parse_term("(coin, true)")) == {AF}
    assert classify_fragment(parse_term("fn x: Bool => x")) == {MU}
    assert classify_fragment(parse_term("(fn x: Bool => (x, x)) coin")) == set()


def test_mult_translation_of_tensor():
    u, ty = translate_t_prime(parse_term("coin (x) true"))
    assert pretty(u) == "(sample as in coin) (x) (sample as in true)"
    assert ty == parse_type("M Bool (x) M Bool")
    assert check_i(None, u).type == ty


def test_ni_translation_merges_products():
    u, ty = translate_t(parse_term("let p = coin (x) coin in let a (x) b = p in (b, a)"))
    assert ty == parse_type("Bool * Bool")
    assert check_ni(None, u).type == ty
    assert DIST.value_eq(denote_target(DIST, parse_term("coin (x) coin"), AF),
                         denote_source(DIST, parse_term("coin (x) coin")))


def test_outside_fragment():
    with pytest.raises(NotInFragment):
        translate_t(parse_term("fn x: Bool => x"))
    with pytest.raises(NotInFragment):
        translate_t_prime(parse_term("(coin, coin)"))


def test_beta_pair_equal_on_both_sides():
    pairs = [(parse_term("(fn v: Bool => v (x) coin) coin"), parse_term("coin (x) coin"))]
    rep = check_full_abstraction(DIST, pairs, MU)
    assert rep.ok and rep.equal_pairs == 1


def test_perturbed_pair_unequal_on_both_sides():
    pairs = [(parse_term("coin (x) coin"), parse_term("coin (x) true"))]
    for frag in (AF, MU):
        rep = check_full_abstraction(DIST, pairs, frag)
        assert rep.ok and rep.equal_pairs == 0


@pytest.mark.parametrize("frag", [AF, MU])
def test_typing_and_semantic_preservation(frag):
    for t in fragment_terms(frag, 60, seed=11, depth=5):
        assert check_translation(t, frag)
        assert preserves_semantics(DIST, t, frag)


@pytest.mark.parametrize("frag", [AF, MU])
@given(seed=st.integers(0, 10**6))
def test_full_abstraction_property(frag, seed):
    pairs = abstraction_pairs(frag, 5, seed, depth=4)
    assert check_full_abstraction(DIST, [(a, b) for _, a, b in pairs], frag).ok


def test_rewrite_pairs_are_equal():
    for frag in (AF, MU):
        for kind, a, b in abstraction_pairs(frag, 50, seed=2):
            if kind in ("reflexive", "rewrite", "let-rewrite"):
                assert DIST.value_eq(denote_source(DIST, a), denote_source(DIST, b)), (pretty(a), pretty(b))
