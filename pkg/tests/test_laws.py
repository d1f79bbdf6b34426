import random

import pytest

from inicalc.laws import (
    COMMUTATIVITY_SENSITIVE, SCHEMAS, SCHEMA_NAMES, LawSchema, build_instance, check_instance,
    check_law, draw_instance, get_schema, i_value_eq,
)
from inicalc.models import get_model
from inicalc.parser import parse_term, pretty
from inicalc.syntax import BOOL, Layer, Let, PairShared, PrimOp, TModal, Var

DIST = get_model("dist")


def box(src):
    return parse_term(src, Layer.I)


def test_shipped_schema_set():
    assert SCHEMA_NAMES == (
        "ni-case-inl", "ni-case-inr", "let-id-body", "let-id-subject", "let-assoc",
        "i-beta-app", "i-let-tensor-beta", "i-case-inl", "i-case-inr",
        "sample-id", "sample-fusion", "sample-assoc", "sample-unit-left", "sample-unit-right",
    )
    assert set(COMMUTATIVITY_SENSITIVE) <= set(SCHEMA_NAMES)


def test_sample_id_on_coin_box():
    s = get_schema("sample-id")
    assert check_instance(s, DIST, {"t": box("sample as in coin")}) is None
    lhs, _ = build_instance(s, {"t": box("sample as in coin")})
    assert pretty(lhs) == "sample (sample as in coin) as x in x"


def test_beta_on_a_variable_body():
    s = get_schema("i-beta-app")
    assert check_instance(s, DIST, {"sigma": TModal(BOOL), "t": Var("x"), "u": box("sample as in true")}) is None


@pytest.mark.parametrize("mid", ["dist", "pset", "name"])
def test_sample_assoc_on_three_boxes(mid):
    eff = {"dist": "coin", "pset": "amb", "name": "fresh"}[mid]
    m = {f"t{i}": box(f"sample as in {eff}") for i in (1, 2, 3)}
    assert check_instance(get_schema("sample-assoc"), get_model(mid), m) is None


def test_unit_laws_on_coin():
    for name in ("sample-unit-left", "sample-unit-right"):
        assert check_instance(get_schema(name), DIST, {"t": box("sample as in not coin")}) is None


def test_a_false_law_is_caught():
    # substituting an effect into a shared pair is not an equation
    bogus = LawSchema(
        "bogus", Layer.NI, "let x = coin in (x, x)", "(coin, coin)", (),
        lambda d: {},
        lambda m: (Let("x", PrimOp("coin"), PairShared(Var("x"), Var("x"))),
                   PairShared(PrimOp("coin"), PrimOp("coin"))),
    )
    rep = check_law(bogus, "dist", count=3)
    assert len(rep.failures) == 3
    assert "!=" in rep.failures[0].reason


def test_ill_typed_instance_is_a_failure():
    s = get_schema("sample-id")
    reason = check_instance(s, DIST, {"t": parse_term("coin", Layer.I)})
    assert reason is not None and reason.startswith("ill-typed")


def test_i_value_eq_uses_model_equality_inside_boxes():
    from inicalc.values import MonV, PairV
    n = get_model("name")
    fresh = n.prim("fresh")
    wasteful = n.bind(fresh, lambda _: fresh)
    assert i_value_eq(n, PairV(MonV(fresh), MonV(fresh)), PairV(MonV(wasteful), MonV(fresh)))


@pytest.mark.parametrize("schema", SCHEMAS, ids=lambda s: s.name)
@pytest.mark.parametrize("mid", ["dist", "pset", "name"])
def test_every_law_holds(schema, mid):
    rep = check_law(schema, mid, count=25, seed=3)
    assert rep.ok, rep.failures[:3]


def test_instances_are_deterministic():
    s = get_schema("sample-fusion")
    a = draw_instance(s, random.Random("k"), "dist", 4)
    b = draw_instance(s, random.Random("k"), "dist", 4)
    assert [pretty(x) for x in build_instance(s, a)] == [pretty(x) for x in build_instance(s, b)]
