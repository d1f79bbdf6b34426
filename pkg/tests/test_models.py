from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from inicalc.models import Dist, NameComp, NameVal, PSet, get_model, render, show_rat, to_json
from inicalc.values import FF, TT, NameV, PairV

H = Fraction(1, 2)
bools = st.sampled_from([TT, FF])


@st.composite
def dists(draw):
    vals = draw(st.lists(st.sampled_from([TT, FF, PairV(TT, FF), PairV(FF, FF)]), min_size=1, max_size=4))
    ws = draw(st.lists(st.integers(1, 9), min_size=len(vals), max_size=len(vals)))
    total = sum(ws)
    return Dist((v, Fraction(w, total)) for v, w in zip(vals, ws))


@st.composite
def psets(draw):
    return PSet(draw(st.lists(st.sampled_from([TT, FF, PairV(TT, TT)]), min_size=1, max_size=3)))


@st.composite
def namecomps(draw):
    """k fresh names, payload picks among them (or a boolean)."""
    k = draw(st.integers(0, 3))
    picks = draw(st.lists(st.integers(0, 2), max_size=2))

    def run(base, k=k, picks=tuple(picks)):
        used = [NameV(base + p) for p in picks if p < k]
        payload = TT
        for u in used:
            payload = PairV(payload, u)
        return k, payload
    return NameComp(run)


MONADIC = {"dist": dists(), "pset": psets(), "name": namecomps()}


def kleisli(model_id):
    m = get_model(model_id)
    if model_id == "name":
        return lambda v: m.bind(m.prim("fresh"), lambda n: m.unit(PairV(v, n)))
    if model_id == "pset":
        return lambda v: PSet([v, PairV(v, v)])
    return lambda v: Dist([(v, Fraction(1, 3)), (PairV(v, v), Fraction(2, 3))])


@pytest.mark.parametrize("mid", ["dist", "pset", "name"])
def test_monad_laws(mid):
    m = get_model(mid)
    f, g = kleisli(mid), kleisli(mid)

    @given(MONADIC[mid], bools)
    def laws(a, v):
        assert m.value_eq(m.bind(m.unit(v), f), f(v))
        assert m.value_eq(m.bind(a, m.unit), a)
        assert m.value_eq(m.bind(m.bind(a, f), g), m.bind(a, lambda x: m.bind(f(x), g)))
    laws()


@pytest.mark.parametrize("mid", ["dist", "pset", "name"])
def test_commutativity(mid):
    m = get_model(mid)

    @given(MONADIC[mid], MONADIC[mid])
    def comm(a, b):
        lhs = m.bind(a, lambda x: m.bind(b, lambda y: m.unit(PairV(x, y))))
        rhs = m.bind(b, lambda y: m.bind(a, lambda x: m.unit(PairV(x, y))))
        assert m.value_eq(lhs, rhs)
        assert m.value_eq(lhs, m.pair_product(a, b))
    comm()


def test_dist_normalizes():
    d = Dist([(TT, H), (FF, 0), (TT, Fraction(1, 4)), (FF, Fraction(1, 4))])
    assert d.items == ((TT, Fraction(3, 4)), (FF, Fraction(1, 4)))
    assert d.total() == 1


@given(dists())
def test_dist_total_is_one(d):
    assert d.total() == 1


def test_coin_and_amb_and_fresh():
    assert get_model("dist").prim("coin") == Dist([(TT, H), (FF, H)])
    assert get_model("pset").prim("amb") == PSet([TT, FF])
    assert get_model("name").prim("fresh").observe() == NameVal(1, NameV(0))
    with pytest.raises(KeyError):
        get_model("pset").prim("coin")


def test_right_unit_example():
    m = get_model("dist")
    coin = m.prim("coin")
    assert m.bind(coin, m.unit) == Dist([(TT, H), (FF, H)])


def test_correlated_bind():
    m = get_model("dist")
    out = m.bind(m.prim("coin"), lambda x: m.unit(PairV(x, x)))
    assert out.as_dict() == {PairV(TT, TT): H, PairV(FF, FF): H}


def test_name_quotient_forgets_unused_names():
    m = get_model("name")
    fresh = m.prim("fresh")
    wasted = m.bind(fresh, lambda _: fresh)
    assert wasted.observe().count == 2
    assert m.value_eq(wasted, fresh)
    same = m.bind(fresh, lambda n: m.unit(PairV(n, n)))
    two = m.pair_product(fresh, fresh)
    assert not m.value_eq(same, two)


def test_name_renaming_invariance():
    m = get_model("name")
    a = m.lift(NameVal(2, PairV(NameV(1), NameV(0))))
    b = m.lift(NameVal(2, PairV(NameV(0), NameV(1))))
    assert m.value_eq(a, b)


def test_rendering():
    d = get_model("dist")
    assert show_rat(Fraction(0)) == "0/1"
    assert render(d, d.prim("coin")) == "{tt: 1/2, ff: 1/2}"
    assert to_json(d, d.prim("coin")) == {"tt": "1/2", "ff": "1/2"}
    p = get_model("pset")
    assert to_json(p, p.prim("amb")) == ["tt", "ff"]
    n = get_model("name")
    assert to_json(n, n.pair_product(n.prim("fresh"), n.prim("fresh"))) == {"names": 2, "value": "(n0,n1)"}


def test_unknown_model():
    with pytest.raises(ValueError):
        get_model("quantum")
