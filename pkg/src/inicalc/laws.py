"""The equational theory of the two-level calculus, checked semantically.

Each `LawSchema` pairs a metavariable sampler with a builder that turns an
assignment of metavariables into a closed left and right side.  An instance
passes when both sides typecheck at the same type and evaluate to
semantically equal results in the chosen model.

Sharing-layer laws that substitute a term for a variable are only sound for
values (substituting an effect would duplicate it), so their instances bind
effectful computations in a `let` prefix and substitute values built over
those variables.  The n-ary `sample` is checked through its binary pieces:
associativity and the two unit laws, with `true` standing in for unit.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .checker import TypeCheckError, check
from .evaluator import EvalError, eval_i, eval_ni
from .generate import DEFAULT_WEIGHTS, GenConfig, GenExhausted, _Gen
from .models import MODEL_IDS, Model, get_model, render
from .parser import pretty, show_type
from .syntax import (
    App, Case, Const, Inj, Lam, Layer, Let, LetTensor, PairShared,
    PairTensor, Proj, Sample, TBool, TModal, TOplus, TProd, TSum,
    Term, Type, Var, substitute, with_layer,
)
from .values import ClosV, IncomparableValue, MonV, PairV, TagV, Value


@dataclass(frozen=True)
class LawSchema:
    name: str
    layer: Layer
    left: str  # templates, for display
    right: str
    metas: tuple  # (metavariable, sort) pairs
    draw: Callable = field(repr=False, compare=False)
    build: Callable = field(repr=False, compare=False)


@dataclass
class LawFailure:
    index: int
    lhs: str
    rhs: str
    reason: str


@dataclass
class LawReport:
    schema: str
    model: str
    checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def passed(self) -> int:
        return self.checked - len(self.failures)


class _Draw:
    """Metavariable sampler shared by all schemas of one instantiation."""

    def __init__(self, rng: random.Random, model: str, depth: int, weights: Optional[dict] = None):
        self.rng = rng
        self.depth = depth
        self.g = _Gen(GenConfig(max_depth=depth, model=model, weights=weights or dict(DEFAULT_WEIGHTS)), rng)

    def ni_type(self, budget: int = 2) -> Type:
        return self.g.ni_type(budget)

    def i_type(self, budget: int = 2, arrows: bool = True) -> Type:
        return self.g.i_type(budget, arrows)

    def ni(self, ty: Type, ctx: Optional[dict] = None) -> Term:
        return self.g.term(Layer.NI, ty, dict(ctx or {}), self.rng.randint(1, self.depth))

    def i(self, ty: Type, ctx: Optional[dict] = None) -> Term:
        d = max(self.rng.randint(1, self.depth), int(self.g.md(ty, Layer.I)) if not ctx else 1)
        return self.g.term(Layer.I, ty, dict(ctx or {}), min(d, self.depth + 2))

    def prefix(self) -> list:
        """Up to two effectful bindings `(z, type, term)`; later ones may use earlier ones."""
        out, ctx = [], {}
        for k in range(self.rng.choice((0, 1, 1, 2))):
            ty = self.ni_type(2)
            z = f"z{k}"
            out.append((z, ty, self.ni(ty, ctx)))
            ctx[z] = ty
        return out

    def value(self, ty: Type, ctx: dict, budget: int = 3) -> Term:
        """A syntactic value (no effects) of `ty` over the variables in `ctx`."""
        vs = [x for x, t in ctx.items() if t == ty]
        if vs and (self.rng.random() < 0.6 or budget <= 1):
            return Var(self.rng.choice(vs))
        match ty:
            case TBool():
                return Const(self.rng.random() < 0.5)
            case TProd(a, b) if budget > 1:
                return PairShared(self.value(a, ctx, budget - 1), self.value(b, ctx, budget - 1))
            case TSum(a, b) if budget > 1:
                i = self.rng.choice((1, 2))
                return Inj(i, self.value(a if i == 1 else b, ctx, budget - 1), ty)
        raise GenExhausted(f"no value of type {show_type(ty)}")


def _ctx(prefix) -> dict:
    return {z: ty for z, ty, _ in prefix}


def _wrap(prefix, body: Term) -> Term:
    for z, _, m in reversed(prefix):
        body = Let(z, m, body)
    return body


# ---------------------------------------------------------------------------
# sharing layer
# ---------------------------------------------------------------------------


def _draw_ni_case(d: _Draw) -> dict:
    pre = d.prefix()
    ctx = _ctx(pre)
    sty = TSum(d.ni_type(2), d.ni_type(2))
    tau = d.ni_type(2)
    return {"prefix": pre, "type": sty, "V1": d.value(sty.left, ctx), "V2": d.value(sty.right, ctx),
            "N1": d.ni(tau, {**ctx, "x": sty.left}), "N2": d.ni(tau, {**ctx, "y": sty.right})}


def _ni_case(index: int):
    def build(m):
        v = m["V1"] if index == 1 else m["V2"]
        lhs = Case(Inj(index, v, m["type"]), "x", m["N1"], "y", m["N2"])
        rhs = substitute(m["N1"], "x", v) if index == 1 else substitute(m["N2"], "y", v)
        return _wrap(m["prefix"], lhs), _wrap(m["prefix"], rhs)
    return build


def _draw_let_id_body(d: _Draw) -> dict:
    pre = d.prefix()
    return {"prefix": pre, "t": d.ni(d.ni_type(2), _ctx(pre))}


def _build_let_id_body(m):
    return _wrap(m["prefix"], Let("x", m["t"], Var("x"))), _wrap(m["prefix"], m["t"])


def _draw_let_id_subject(d: _Draw) -> dict:
    pre = d.prefix()
    ctx = _ctx(pre)
    sigma = d.ni_type(2)
    return {"prefix": pre, "M0": d.ni(sigma, ctx), "t": d.ni(d.ni_type(2), {**ctx, "x": sigma}),
            "renamed": d.rng.random() < 0.5}


def _build_let_id_subject(m):
    # literal reading: `let x = x in t` under an outer binding of x; renamed
    # reading: `let x = w in t` is `t[w/x]` for a bound variable w
    if m["renamed"]:
        lhs = Let("w", m["M0"], Let("x", Var("w"), m["t"]))
        rhs = Let("w", m["M0"], substitute(m["t"], "x", Var("w")))
    else:
        lhs = Let("x", m["M0"], Let("x", Var("x"), m["t"]))
        rhs = Let("x", m["M0"], m["t"])
    return _wrap(m["prefix"], lhs), _wrap(m["prefix"], rhs)


def _draw_let_assoc(d: _Draw) -> dict:
    pre = d.prefix()
    ctx = _ctx(pre)
    s1, s2 = d.ni_type(2), d.ni_type(2)
    return {"prefix": pre, "M1": d.ni(s1, ctx), "M2": d.ni(s2, {**ctx, "x": s1}),
            "M3": d.ni(d.ni_type(2), {**ctx, "y": s2})}


def _build_let_assoc(m):
    lhs = Let("y", Let("x", m["M1"], m["M2"]), m["M3"])
    rhs = Let("x", m["M1"], Let("y", m["M2"], m["M3"]))
    return _wrap(m["prefix"], lhs), _wrap(m["prefix"], rhs)


# ---------------------------------------------------------------------------
# independent layer
# ---------------------------------------------------------------------------


def _draw_beta(d: _Draw) -> dict:
    sigma = d.i_type(2)
    tau = d.i_type(2, arrows=False)
    return {"sigma": sigma, "t": d.i(tau, {"x": sigma}), "u": d.i(sigma)}


def _build_beta(m):
    return App(Lam("x", m["sigma"], m["t"]), m["u"]), substitute(m["t"], "x", m["u"])


def _draw_let_tensor(d: _Draw) -> dict:
    s1, s2 = d.i_type(2), d.i_type(2)
    tau = d.i_type(2, arrows=False)
    return {"t1": d.i(s1), "t2": d.i(s2), "u": d.i(tau, {"x1": s1, "x2": s2})}


def _build_let_tensor(m):
    lhs = LetTensor("x1", "x2", PairTensor(m["t1"], m["t2"]), m["u"])
    return lhs, substitute(substitute(m["u"], "x1", m["t1"]), "x2", m["t2"])


def _draw_i_case(d: _Draw) -> dict:
    sty = TOplus(d.i_type(2), d.i_type(2))
    tau = d.i_type(2, arrows=False)
    return {"type": sty, "t1": d.i(sty.left), "t2": d.i(sty.right),
            "u1": d.i(tau, {"x": sty.left}), "u2": d.i(tau, {"y": sty.right})}


def _i_case(index: int):
    def build(m):
        t = m["t1"] if index == 1 else m["t2"]
        lhs = Case(Inj(index, t, m["type"]), "x", m["u1"], "y", m["u2"])
        rhs = substitute(m["u1"], "x", t) if index == 1 else substitute(m["u2"], "y", t)
        return lhs, rhs
    return build


def _box(d: _Draw, sigma: Optional[Type] = None) -> Term:
    return d.i(TModal(sigma if sigma is not None else d.ni_type(2)))


def _draw_sample_id(d: _Draw) -> dict:
    return {"t": _box(d)}


def _build_sample_id(m):
    return Sample(((m["t"], "x"),), Var("x")), m["t"]


def _draw_sample_fusion(d: _Draw) -> dict:
    sigma, rho, tau = d.ni_type(2), d.ni_type(2), d.ni_type(2)
    return {"t": _box(d, sigma), "M": d.ni(rho, {"x": sigma}), "N": d.ni(tau, {"y": rho})}


def _build_sample_fusion(m):
    lhs = Sample(((Sample(((m["t"], "x"),), m["M"]), "y"),), m["N"])
    rhs = Sample(((m["t"], "x"),), Let("y", m["M"], m["N"]))
    return lhs, rhs


def _draw_sample_assoc(d: _Draw) -> dict:
    return {"t1": _box(d), "t2": _box(d), "t3": _box(d)}


def _build_sample_assoc(m):
    y = Var("y")
    inner_r = Sample(((m["t2"], "x2"), (m["t3"], "x3")), PairShared(Var("x2"), Var("x3")))
    lhs = Sample(((m["t1"], "x1"), (inner_r, "y")),
                 PairShared(PairShared(Var("x1"), Proj(1, y)), Proj(2, y)))
    inner_l = Sample(((m["t1"], "x1"), (m["t2"], "x2")), PairShared(Var("x1"), Var("x2")))
    rhs = Sample(((inner_l, "y"), (m["t3"], "x3")),
                 PairShared(PairShared(Proj(1, y), Proj(2, y)), Var("x3")))
    return lhs, rhs


_UNIT = Sample((), Const(True))


def _build_unit_left(m):
    return Sample(((_UNIT, "x"), (m["t"], "y")), Var("y")), m["t"]


def _build_unit_right(m):
    return Sample(((m["t"], "x"), (_UNIT, "y")), Var("x")), m["t"]


def _s(name, layer, left, right, metas, draw, build):
    return LawSchema(name, layer, left, right, tuple(metas), draw, build)


SCHEMAS = (
    _s("ni-case-inl", Layer.NI, "case inl V of inl x => N1 | inr y => N2", "N1[V/x]",
       [("V", "value"), ("N1", "term"), ("N2", "term")], _draw_ni_case, _ni_case(1)),
    _s("ni-case-inr", Layer.NI, "case inr V of inl x => N1 | inr y => N2", "N2[V/y]",
       [("V", "value"), ("N1", "term"), ("N2", "term")], _draw_ni_case, _ni_case(2)),
    _s("let-id-body", Layer.NI, "let x = t in x", "t", [("t", "term")],
       _draw_let_id_body, _build_let_id_body),
    _s("let-id-subject", Layer.NI, "let x = x in t", "t", [("M0", "term"), ("t", "term")],
       _draw_let_id_subject, _build_let_id_subject),
    _s("let-assoc", Layer.NI, "let y = (let x = M1 in M2) in M3", "let x = M1 in let y = M2 in M3",
       [("M1", "term"), ("M2", "term"), ("M3", "term")], _draw_let_assoc, _build_let_assoc),
    _s("i-beta-app", Layer.I, "(fn x: s => t) u", "t[u/x]", [("t", "term"), ("u", "term")],
       _draw_beta, _build_beta),
    _s("i-let-tensor-beta", Layer.I, "let x1 (x) x2 = t1 (x) t2 in u", "u[t1/x1][t2/x2]",
       [("t1", "term"), ("t2", "term"), ("u", "term")], _draw_let_tensor, _build_let_tensor),
    _s("i-case-inl", Layer.I, "case inl t of inl x => u1 | inr y => u2", "u1[t/x]",
       [("t", "term"), ("u1", "term"), ("u2", "term")], _draw_i_case, _i_case(1)),
    _s("i-case-inr", Layer.I, "case inr t of inl x => u1 | inr y => u2", "u2[t/y]",
       [("t", "term"), ("u1", "term"), ("u2", "term")], _draw_i_case, _i_case(2)),
    _s("sample-id", Layer.I, "sample t as x in x", "t", [("t", "term")],
       _draw_sample_id, _build_sample_id),
    _s("sample-fusion", Layer.I, "sample (sample t as x in M) as y in N",
       "sample t as x in (let y = M in N)", [("t", "term"), ("M", "term"), ("N", "term")],
       _draw_sample_fusion, _build_sample_fusion),
    _s("sample-assoc", Layer.I,
       "sample t1, (sample t2, t3 as x2, x3 in (x2, x3)) as x1, y in ((x1, fst y), snd y)",
       "sample (sample t1, t2 as x1, x2 in (x1, x2)), t3 as y, x3 in ((fst y, snd y), x3)",
       [("t1", "term"), ("t2", "term"), ("t3", "term")], _draw_sample_assoc, _build_sample_assoc),
    _s("sample-unit-left", Layer.I, "sample (sample as in true), t as x, y in y", "t",
       [("t", "term")], _draw_sample_id, _build_unit_left),
    _s("sample-unit-right", Layer.I, "sample t, (sample as in true) as x, y in x", "t",
       [("t", "term")], _draw_sample_id, _build_unit_right),
)

SCHEMA_NAMES = tuple(s.name for s in SCHEMAS)

# laws whose validity rests on the monad being commutative
COMMUTATIVITY_SENSITIVE = ("sample-assoc", "sample-unit-left", "sample-unit-right", "sample-fusion")


def get_schema(name: str) -> LawSchema:
    for s in SCHEMAS:
        if s.name == name:
            return s
    raise KeyError(name)


# ---------------------------------------------------------------------------
# checking
# ---------------------------------------------------------------------------


def i_value_eq(model: Model, v1: Value, v2: Value) -> bool:
    """Structural equality of independent-layer values; boxes compare semantically."""
    match v1, v2:
        case MonV(a), MonV(b):
            return model.value_eq(a, b)
        case PairV(a1, b1), PairV(a2, b2):
            return i_value_eq(model, a1, a2) and i_value_eq(model, b1, b2)
        case TagV(i, a), TagV(j, b):
            return i == j and i_value_eq(model, a, b)
    if isinstance(v1, ClosV) or isinstance(v2, ClosV):
        raise IncomparableValue("cannot compare functions")
    return v1 == v2


def _show(model: Model, layer: Layer, v) -> str:
    if layer is Layer.NI:
        return render(model, v)
    return _show_i(model, v)


def _show_i(model: Model, v) -> str:
    match v:
        case MonV(c):
            return "M" + render(model, c)
        case PairV(a, b):
            return f"({_show_i(model, a)} (x) {_show_i(model, b)})"
        case TagV(i, a):
            return f"{'inl' if i == 1 else 'inr'} {_show_i(model, a)}"
    return str(v)


def build_instance(schema: LawSchema, metas: dict) -> tuple:
    lhs, rhs = schema.build(metas)
    return with_layer(lhs, schema.layer), with_layer(rhs, schema.layer)


def check_instance(schema: LawSchema, model: Model, metas: dict) -> Optional[str]:
    """None when the instance holds, otherwise a reason."""
    lhs, rhs = build_instance(schema, metas)
    try:
        t1 = check(schema.layer, None, lhs, None, model.id).type
        t2 = check(schema.layer, None, rhs, None, model.id).type
    except TypeCheckError as e:
        return f"ill-typed side: {e}"
    if t1 != t2:
        return f"sides have types {show_type(t1)} and {show_type(t2)}"
    try:
        if schema.layer is Layer.NI:
            v1, v2 = eval_ni(model, {}, lhs), eval_ni(model, {}, rhs)
            same = model.value_eq(v1, v2)
        else:
            v1, v2 = eval_i(model, {}, lhs), eval_i(model, {}, rhs)
            same = i_value_eq(model, v1, v2)
    except (EvalError, IncomparableValue) as e:
        return f"evaluation failed: {e}"
    if same:
        return None
    return f"{_show(model, schema.layer, v1)} != {_show(model, schema.layer, v2)}"


def draw_instance(schema: LawSchema, rng: random.Random, model: str, depth: int,
                  weights: Optional[dict] = None, tries: int = 200) -> dict:
    for _ in range(tries):
        try:
            return schema.draw(_Draw(rng, model, depth, weights))
        except GenExhausted:
            continue
    raise GenExhausted(f"could not instantiate {schema.name}")


def check_law(schema: LawSchema, model_id: str = "dist", count: int = 50, seed: int = 0,
              depth: int = 4, weights: Optional[dict] = None) -> LawReport:
    """Check `count` random closed instances of one schema in one model.

    Instance `i` draws from its own generator seeded by (seed, schema, model,
    i), so reports are reproducible and independent of evaluation order.
    """
    model = get_model(model_id)
    rep = LawReport(schema.name, model_id)
    for i in range(count):
        rng = random.Random(f"{seed}:{schema.name}:{model_id}:{i}")
        metas = draw_instance(schema, rng, model_id, depth, weights)
        reason = check_instance(schema, model, metas)
        rep.checked += 1
        if reason is not None:
            lhs, rhs = build_instance(schema, metas)
            rep.failures.append(LawFailure(i, pretty(lhs), pretty(rhs), reason))
    return rep


def check_all_laws(model_ids=MODEL_IDS, count: int = 50, seed: int = 0, depth: int = 4,
                   schemas=SCHEMAS) -> list:
    return [check_law(s, m, count, seed, depth) for m in model_ids for s in schemas]
