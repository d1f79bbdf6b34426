"""The seven acceptance criteria, each at its stated size and time limit.

Every test prints one line, ``[PASS]`` or ``[FAIL]``, naming its criterion.
"""

import time
from fractions import Fraction

import pytest

from inicalc.checker import ErrorKind, TypeCheckError, check_i, check_ini
from inicalc.declarative import agree
from inicalc.evaluator import eval_ini
from inicalc.laws import COMMUTATIVITY_SENSITIVE, SCHEMAS, check_law
from inicalc.models import get_model
from inicalc.oracle import check_factorization, check_tensor_soundness_i, check_tensor_soundness_ini
from inicalc.parser import parse_term, parse_type
from inicalc.suites import (
    abstraction_pairs, fragment_terms, soundness_terms, splitting_corpus,
)
from inicalc.syntax import Layer, TModal, TTensor, contains_arrow, depth
from inicalc.translate import (
    Fragment, check_full_abstraction, check_translation, denote_source, preserves_semantics,
)
from inicalc.values import FF, TT, PairV

H, Q = Fraction(1, 2), Fraction(1, 4)


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail, seconds):
        with capsys.disabled():
            mark = "PASS" if ok else "FAIL"
            print(f"\n[{mark}] criterion {number}: {title} ({detail}; {seconds:.2f}s)")
    return emit


def test_criterion_1_example_goldens(report):
    t0 = time.perf_counter()
    dist = get_model("dist")
    coin = eval_ini(dist, {}, parse_term("coin")).as_dict()
    corr = eval_ini(dist, {}, parse_term("let x = coin in (x, x)"))
    rep = check_factorization(dist, corr)
    elapsed = time.perf_counter() - t0
    ok = (coin == {TT: H, FF: H}
          and corr.as_dict() == {PairV(TT, TT): H, PairV(FF, FF): H}
          and not rep.is_product
          and rep.witness == (PairV(TT, FF), Fraction(0), Q)
          and elapsed < 1.0)
    report(1, "coin and correlated-pair goldens, oracle witness 0 vs 1/4", ok,
           f"witness {rep.witness[0]}: {rep.witness[1]} vs {rep.witness[2]}", elapsed)
    assert ok


def test_criterion_2_one_level_tensor_soundness(report):
    t0 = time.perf_counter()
    dist = get_model("dist")
    corpus = soundness_terms(Layer.INI, "dist", 500, seed=2024, depth=6)
    shapes_ok = all(isinstance(ty, TTensor) and not contains_arrow(ty) and depth(t) <= 6
                    for t, ty in corpus)
    failures = [t for t, _ in corpus if not check_tensor_soundness_ini(dist, t).is_product]
    elapsed = time.perf_counter() - t0
    ok = len(corpus) == 500 and shapes_ok and not failures and elapsed < 60
    report(2, "500 one-level terms at t1 (x) t2 factorize exactly", ok,
           f"{500 - len(failures)}/500", elapsed)
    assert ok


@pytest.mark.parametrize("mid", ["dist", "pset", "name"])
def test_criterion_3_erasure_consistency(report, mid):
    t0 = time.perf_counter()
    model = get_model(mid)
    corpus = soundness_terms(Layer.I, mid, 200, seed=2024, depth=6)
    shapes_ok = all(isinstance(ty, TTensor) and isinstance(ty.left, TModal)
                    and isinstance(ty.right, TModal) for _, ty in corpus)
    reps = [check_tensor_soundness_i(model, t) for t, _ in corpus]
    equal = sum(r.notes["erased_equals_product"] for r in reps)
    product = sum(r.is_product for r in reps)
    disjoint = sum(bool(r.disjoint) for r in reps) if mid == "name" else 200
    elapsed = time.perf_counter() - t0
    ok = shapes_ok and equal == product == disjoint == 200 and elapsed < 60
    extra = f", disjoint names {disjoint}/200" if mid == "name" else ""
    report(3, f"200 two-level terms at M t1 (x) M t2 [{mid}]: erased joint = product", ok,
           f"{equal}/200{extra}", elapsed)
    assert ok


def _rejects(fn, kinds):
    try:
        fn()
    except TypeCheckError as e:
        return e.kind in kinds
    return False


def test_criterion_4_typechecker_verdicts(report):
    t0 = time.perf_counter()
    dist_ctx = [("dist", TModal(parse_type("Bool")))]
    verdicts = [
        _rejects(lambda: check_ini(None, parse_term("let x = coin in (fn y: Bool => x (x) y) x")),
                 {ErrorKind.SharedAcrossTensor}),
        _rejects(lambda: check_i(dist_ctx, parse_term(
            "if dist then (sample as in true) (x) (sample as in true) "
            "else (sample as in false) (x) (sample as in false)", Layer.I)),
            {ErrorKind.LayerMismatch, ErrorKind.Mismatch}),
        check_i(dist_ctx, parse_term(
            "sample dist as x in (if x then (true, true) else (false, false))", Layer.I)).type
        == parse_type("M (Bool * Bool)"),
        check_ini(None, parse_term("fn z: Bool (x) Bool => let a (x) b = z in (a, b)")).type
        == parse_type("Bool (x) Bool -o Bool * Bool"),
    ]
    elapsed = time.perf_counter() - t0
    ok = all(verdicts)
    report(4, "verdicts on the four example programs", ok, f"{sum(verdicts)}/4 match", elapsed)
    assert ok


def test_criterion_5_equational_theory(report):
    t0 = time.perf_counter()
    rows = [check_law(s, "dist", count=50, seed=2024) for s in SCHEMAS]
    rows += [check_law(s, mid, count=50, seed=2024) for mid in ("pset", "name") for s in SCHEMAS]
    failures = sum(len(r.failures) for r in rows)
    dist_ok = all(r.checked >= 50 and r.ok for r in rows if r.model == "dist")
    sensitive_ok = all(r.ok for r in rows if r.schema in COMMUTATIVITY_SENSITIVE)
    elapsed = time.perf_counter() - t0
    ok = len(rows) == 42 and dist_ok and sensitive_ok and failures == 0
    report(5, "14 law schemas x 50 instances, dist plus pset and name", ok,
           f"{sum(r.checked for r in rows)} instances, {failures} failures", elapsed)
    assert ok


def test_criterion_6_translations(report):
    t0 = time.perf_counter()
    dist = get_model("dist")
    typing = semantics = 0
    for frag in (Fragment.ArrowFree, Fragment.Multiplicative):
        for t in fragment_terms(frag, 200, seed=2024, depth=5):
            typing += check_translation(t, frag)
            semantics += preserves_semantics(dist, t, frag)
    checked = violations = rewrite_equal = perturbed_unequal = 0
    for frag in (Fragment.ArrowFree, Fragment.Multiplicative):
        pairs = abstraction_pairs(frag, 60, seed=2024, depth=4)
        rep = check_full_abstraction(dist, [(a, b) for _, a, b in pairs], frag)
        checked += rep.checked
        violations += len(rep.violations)
        for kind, a, b in pairs:
            same = dist.value_eq(denote_source(dist, a), denote_source(dist, b))
            rewrite_equal += kind in ("rewrite", "let-rewrite") and same
            perturbed_unequal += kind == "perturbed" and not same
    elapsed = time.perf_counter() - t0
    ok = (typing == 400 and semantics == 400 and checked >= 100 and violations == 0
          and rewrite_equal > 0 and perturbed_unequal > 0)
    report(6, "typing/semantic preservation and full abstraction", ok,
           f"typing {typing}/400, semantics {semantics}/400, {checked} pairs "
           f"({rewrite_equal} rewrite-equal, {perturbed_unequal} perturbed-unequal), "
           f"{violations} violations", elapsed)
    assert ok


def test_criterion_7_splitting_agreement(report):
    t0 = time.perf_counter()
    corpus = splitting_corpus(900, seed=2024, depth=5, max_free=4)
    disagreements = accepted = 0
    for layer, model, ctx, t in corpus:
        assert len(ctx) <= 4
        alg, dec = agree(layer, ctx, t, model)
        accepted += alg is not None
        disagreements += alg != dec
    elapsed = time.perf_counter() - t0
    ok = disagreements == 0 and 0 < accepted < len(corpus)
    report(7, "algorithmic and brute-force splitting agree", ok,
           f"{len(corpus)} terms, {accepted} accepted, {disagreements} disagreements", elapsed)
    assert ok
