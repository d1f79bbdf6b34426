import pytest
from hypothesis import given, strategies as st

from inicalc.checker import TypeCheckError
from inicalc.declarative import agree, declarative_type, expected_rules, replay
from inicalc.generate import GenConfig, generate_terms
from inicalc.parser import parse_term
from inicalc.suites import splitting_corpus
from inicalc.syntax import BOOL, Layer, TModal


def test_declarative_finds_split():
    t = parse_term("x (x) y")
    assert declarative_type(Layer.INI, [("x", BOOL), ("y", BOOL)], t) is not None
    assert declarative_type(Layer.INI, [("x", BOOL)], parse_term("x (x) x")) is None


def test_declarative_additive_pair_shares():
    assert declarative_type(Layer.INI, [("x", BOOL)], parse_term("(x, x)")) is not None


@pytest.mark.parametrize("layer,model", [(Layer.INI, "dist"), (Layer.NI, "name"), (Layer.I, "pset")])
def test_replay_generated_terms(layer, model):
    for t in generate_terms(GenConfig(max_depth=4, seed=5, layer=layer, model=model, count=60)):
        replay(layer, None, t, model)


def test_replay_rejects_ill_typed():
    with pytest.raises(TypeCheckError):
        replay(Layer.INI, None, parse_term("let x = coin in x (x) x"))


def test_expected_rules_for_sample_body():
    rules = [r for r, _ in expected_rules(Layer.I, parse_term("sample d as x in (x, x)", Layer.I))]
    assert rules == ["Sample", "Var", "×Intro", "Var", "Var"]


def test_open_terms_agree():
    ctx = [("d", TModal(BOOL)), ("e", TModal(BOOL))]
    for src in ["sample d, e as x, y in (x, y)", "sample d, d as x, y in x", "d (x) e", "e (x) e"]:
        alg, dec = agree(Layer.I, ctx, parse_term(src, Layer.I))
        assert alg == dec


@given(st.integers(0, 10**6))
def test_agreement_property(seed):
    for layer, model, ctx, t in splitting_corpus(3, seed, depth=4):
        alg, dec = agree(layer, ctx, t, model)
        assert alg == dec


def test_corpus_contains_rejections():
    verdicts = [agree(l, c, t, m)[0] is None for l, m, c, t in splitting_corpus(300, 0)]
    assert 0 < sum(verdicts) < len(verdicts)
