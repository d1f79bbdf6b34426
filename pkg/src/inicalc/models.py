"""Commutative effect models: exact distributions, finite powersets, names.

Each model is a small object exposing the monad (`unit`, `bind`), derived
helpers (`map`, `pair_product`), semantic equality (`value_eq`) and the
table of effectful primitives it provides.  The evaluators only ever talk to
a model through this interface.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

from .values import (
    FF, TT, IncomparableValue, NameV, PairV, Value, is_first_order, names_in,
    rename_names, sort_key,
)


def _canon_order(vs: list) -> list:
    try:
        return sorted(vs, key=sort_key)
    except IncomparableValue:
        return vs  # closures only appear transiently; keep insertion order


def _require_first_order(v: Value):
    if not is_first_order(v):
        raise IncomparableValue(f"cannot compare {v}")


# ---------------------------------------------------------------------------
# Distributions
# ---------------------------------------------------------------------------


class Dist:
    """Finite distribution with exact rational weights.

    Zero weights are pruned, duplicates merged and entries kept in the
    canonical value order, so structural equality is semantic equality.
    """

    __slots__ = ("items",)

    def __init__(self, pairs: Iterable = ()):
        acc: dict = {}
        for v, w in pairs:
            w = Fraction(w)
            acc[v] = acc.get(v, Fraction(0)) + w
        keys = _canon_order([v for v, w in acc.items() if w != 0])
        self.items = tuple((v, acc[v]) for v in keys)

    @classmethod
    def point(cls, v: Value) -> "Dist":
        return cls([(v, 1)])

    def weight(self, v: Value) -> Fraction:
        for k, w in self.items:
            if k == v:
                return w
        return Fraction(0)

    def support(self) -> list:
        return [v for v, _ in self.items]

    def total(self) -> Fraction:
        return sum((w for _, w in self.items), Fraction(0))

    def as_dict(self) -> dict:
        return dict(self.items)

    def __eq__(self, other) -> bool:
        return isinstance(other, Dist) and self.as_dict() == other.as_dict()

    def __hash__(self) -> int:
        return hash(frozenset(self.items))

    def __len__(self) -> int:
        return len(self.items)

    def __repr__(self) -> str:
        return "Dist({" + ", ".join(f"{v}: {w}" for v, w in self.items) + "})"

    __str__ = __repr__


class PSet:
    """Finite set of outcomes, kept in canonical order."""

    __slots__ = ("elems",)

    def __init__(self, elems: Iterable = ()):
        self.elems = tuple(_canon_order(list(dict.fromkeys(elems))))

    def __eq__(self, other) -> bool:
        return isinstance(other, PSet) and set(self.elems) == set(other.elems)

    def __hash__(self) -> int:
        return hash(frozenset(self.elems))

    def __iter__(self):
        return iter(self.elems)

    def __len__(self) -> int:
        return len(self.elems)

    def __contains__(self, v) -> bool:
        return v in set(self.elems)

    def __repr__(self) -> str:
        return "PSet({" + ", ".join(str(v) for v in self.elems) + "})"

    __str__ = __repr__


# ---------------------------------------------------------------------------
# Name generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NameVal:
    """Observed result of a name-generating computation.

    `count` names were generated; the payload refers to them by index.
    """

    count: int
    payload: Value

    def normalized(self) -> "NameVal":
        """Renumber names by first use in the payload; unused names go last."""
        used = names_in(self.payload)
        order = {old: new for new, old in enumerate(used)}
        return NameVal(self.count, rename_names(self.payload, order.__getitem__))

    def canonical(self) -> "NameVal":
        """Representative of the quotient: names the payload never mentions
        are forgotten, the rest are numbered by first use."""
        used = names_in(self.payload)
        return NameVal(len(used), self.normalized().payload)

    def used(self) -> set:
        return set(names_in(self.payload))

    def __str__(self) -> str:
        return f"({self.count}, {self.payload})"


class NameComp:
    """A name-generating computation in state-passing style.

    ``run(base)`` returns ``(k, payload)``: the computation allocates names
    ``base .. base+k-1`` and may mention them (and names it was handed) in
    its payload.
    """

    __slots__ = ("run", "label")

    def __init__(self, run: Callable, label: str = ""):
        self.run = run
        self.label = label

    def observe(self) -> NameVal:
        k, v = self.run(0)
        return NameVal(k, v)

    def __repr__(self) -> str:
        return f"NameComp{self.observe().normalized()}"

    __str__ = __repr__


# ---------------------------------------------------------------------------
# Model handles
# ---------------------------------------------------------------------------


class Model:
    id: str = ""
    prims: dict = {}

    def unit(self, v: Value):
        raise NotImplementedError

    def bind(self, m, f: Callable):
        raise NotImplementedError

    def map(self, m, g: Callable):
        return self.bind(m, lambda v: self.unit(g(v)))

    def pair_product(self, m1, m2):
        return self.bind(m1, lambda a: self.bind(m2, lambda b: self.unit(PairV(a, b))))

    def observe(self, m):
        """The model's canonical observable for a monadic value."""
        return m

    def value_eq(self, m1, m2) -> bool:
        raise NotImplementedError

    def prim(self, name: str):
        if name not in self.prims:
            raise KeyError(name)
        return self.prims[name]

    def __repr__(self) -> str:
        return f"<model {self.id}>"


class DistModel(Model):
    id = "dist"

    def __init__(self):
        self.prims = {"coin": Dist([(TT, Fraction(1, 2)), (FF, Fraction(1, 2))])}

    def unit(self, v):
        return Dist.point(v)

    def bind(self, m: Dist, f):
        if len(m.items) == 1:
            return f(m.items[0][0])
        out = []
        for v, p in m.items:
            for w, q in f(v).items:
                out.append((w, p * q))
        return Dist(out)

    def pair_product(self, m1: Dist, m2: Dist):
        return Dist((PairV(a, b), p * q) for a, p in m1.items for b, q in m2.items)

    def value_eq(self, m1: Dist, m2: Dist) -> bool:
        for v, _ in m1.items + m2.items:
            _require_first_order(v)
        return m1 == m2


class PSetModel(Model):
    id = "pset"

    def __init__(self):
        self.prims = {"amb": PSet([TT, FF])}

    def unit(self, v):
        return PSet([v])

    def bind(self, m: PSet, f):
        out = []
        for v in m:
            out.extend(f(v))
        return PSet(out)

    def pair_product(self, m1: PSet, m2: PSet):
        return PSet(PairV(a, b) for a in m1 for b in m2)

    def value_eq(self, m1: PSet, m2: PSet) -> bool:
        for v in m1.elems + m2.elems:
            _require_first_order(v)
        return m1 == m2


class NameModel(Model):
    id = "name"

    def __init__(self):
        self.prims = {"fresh": NameComp(lambda base: (1, NameV(base)), "fresh")}

    def unit(self, v):
        return NameComp(lambda base: (0, v))

    def bind(self, m: NameComp, f):
        def run(base):
            k1, v = m.run(base)
            k2, w = f(v).run(base + k1)
            return k1 + k2, w
        return NameComp(run)

    def lift(self, nv: NameVal) -> NameComp:
        """Re-embed an observed closed computation (names shift with the base)."""
        return NameComp(lambda base: (nv.count, rename_names(nv.payload, lambda i: i + base)))

    def observe(self, m: NameComp) -> NameVal:
        return m.observe()

    def value_eq(self, m1: NameComp, m2: NameComp) -> bool:
        a, b = m1.observe(), m2.observe()
        _require_first_order(a.payload)
        _require_first_order(b.payload)
        return a.canonical() == b.canonical()


_MODELS = {"dist": DistModel, "pset": PSetModel, "name": NameModel}


def get_model(model_id: str) -> Model:
    try:
        return _MODELS[model_id]()
    except KeyError:
        raise ValueError(f"unknown model {model_id!r}; expected one of {sorted(_MODELS)}") from None


MODEL_IDS = tuple(_MODELS)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def show_rat(w: Fraction) -> str:
    return f"{w.numerator}/{w.denominator}"


def render(model: Model, m) -> str:
    """Human-readable text for a monadic value."""
    if isinstance(model, DistModel):
        return "{" + ", ".join(f"{v}: {show_rat(w)}" for v, w in m.items) + "}"
    if isinstance(model, PSetModel):
        return "{" + ", ".join(str(v) for v in m.elems) + "}"
    nv = model.observe(m).normalized()
    return f"names={nv.count} value={nv.payload}"


def to_json(model: Model, m):
    """Machine-readable form: exact rationals as "p/q" strings."""
    if isinstance(model, DistModel):
        return {str(v): show_rat(w) for v, w in m.items}
    if isinstance(model, PSetModel):
        return [str(v) for v in m.elems]
    nv = model.observe(m).normalized()
    return {"names": nv.count, "value": str(nv.payload)}

