"""Denotational evaluators over a pluggable effect model.

`eval_ini` and `eval_ni` share one Kleisli worker: every term denotes a
monadic value, pairs of either kind sequence their components, and
application samples the function, then the argument.  `eval_i` is the plain
semantics of the independent layer, where only `sample` touches the monad.
`eval_erased` runs an independent-layer term through the Kleisli worker as
if `M` were transparent, producing one joint computation.
"""

from __future__ import annotations

from typing import Optional

from .models import Model
from .syntax import (
    App, Case, Const, Inj, Lam, Layer, Let, LetTensor, PairShared, PairTensor,
    PrimOp, Proj, Sample, Term, Type, Var, contains_arrow, free_vars,
)
from .values import BoolV, ClosV, MonV, NameV, PairV, TagV, Value, untuple_value


class EvalError(Exception):
    """Evaluation hit an ill-typed configuration or a missing primitive."""

    def __init__(self, message: str, kind: str = "EvalError"):
        self.kind = kind
        super().__init__(message)


class UnsupportedType(EvalError):
    def __init__(self, message: str):
        super().__init__(message, "UnsupportedType")


def apply_pure(op: str, v: Value) -> Value:
    match op, v:
        case "not", BoolV(b):
            return BoolV(not b)
        case "and", PairV(BoolV(a), BoolV(b)):
            return BoolV(a and b)
        case "or", PairV(BoolV(a), BoolV(b)):
            return BoolV(a or b)
        case "xor", PairV(BoolV(a), BoolV(b)):
            return BoolV(a != b)
        case "eqb", PairV(BoolV(a), BoolV(b)):
            return BoolV(a == b)
        case "eqn", PairV(NameV(a), NameV(b)):
            return BoolV(a == b)
    raise EvalError(f"bad operand {v} for {op}")


def _closure(env: dict, x: str, body: Term, layer) -> ClosV:
    fv = free_vars(body) - {x}
    return ClosV(tuple(sorted((k, env[k]) for k in fv if k in env)), x, body, layer)


class _Kleisli:
    """Monadic evaluation: each clause returns a value of `model`."""

    def __init__(self, model: Model, mode: str):
        self.m = model
        self.mode = mode

    def prim(self, op: str):
        try:
            return self.m.prim(op)
        except KeyError:
            raise EvalError(f"the {self.m.id} model does not provide {op}", "PrimUnknown") from None

    def ev(self, t: Term, env: dict):
        m = self.m
        match t:
            case Var(x):
                if x not in env:
                    raise EvalError(f"unbound variable {x!r}")
                return m.unit(env[x])
            case Const(b):
                return m.unit(BoolV(b))
            case PrimOp(op, ()):
                return self.prim(op)
            case PrimOp(op, (a,)):
                return m.map(self.ev(a, env), lambda v: apply_pure(op, v))
            case PairShared(a, b) | PairTensor(a, b):
                # the second component does not depend on the first, so it is evaluated once
                ma, mb = self.ev(a, env), self.ev(b, env)
                return m.bind(ma, lambda va: m.bind(mb, lambda vb: m.unit(PairV(va, vb))))
            case Proj(i, b):
                return m.map(self.ev(b, env), lambda p: _project(p, i))
            case LetTensor(x, y, a, b):
                def k(p):
                    if not isinstance(p, PairV):
                        raise EvalError(f"let (x) on non-pair {p}")
                    return self.ev(b, {**env, x: p.left, y: p.right})
                return m.bind(self.ev(a, env), k)
            case Lam(x, _, b):
                return m.unit(_closure(env, x, b, self.mode))
            case App(f, a):
                mf, ma = self.ev(f, env), self.ev(a, env)
                return m.bind(mf, lambda c: m.bind(ma, lambda v: self.apply(c, v)))
            case Let(x, a, b):
                return m.bind(self.ev(a, env), lambda v: self.ev(b, {**env, x: v}))
            case Inj(i, b, _):
                return m.map(self.ev(b, env), lambda v: TagV(i, v))
            case Case(s, x, a, y, b):
                return m.bind(self.ev(s, env), lambda v: self.branch(v, x, a, y, b, env))
            case Sample(binds, body):
                if self.mode != "erased":
                    raise EvalError("sample outside the independent layer")
                return self.sample_seq(list(binds), body, env, {})
        raise EvalError(f"cannot evaluate {t!r}")

    def sample_seq(self, binds: list, body: Term, env: dict, inner: dict):
        if not binds:
            return self.ev(body, inner)
        (src, x), rest = binds[0], binds[1:]
        return self.m.bind(self.ev(src, env), lambda v: self.sample_seq(rest, body, env, {**inner, x: v}))

    def apply(self, c, v):
        if not isinstance(c, ClosV):
            raise EvalError(f"applying non-function {c}")
        return self.ev(c.body, {**dict(c.env), c.param: v})

    def branch(self, v, x, a, y, b, env):
        # a boolean scrutinee binds itself: tt takes the left branch
        match v:
            case TagV(1, w):
                return self.ev(a, {**env, x: w})
            case TagV(2, w):
                return self.ev(b, {**env, y: w})
            case BoolV(True):
                return self.ev(a, {**env, x: v})
            case BoolV(False):
                return self.ev(b, {**env, y: v})
        raise EvalError(f"case on {v}")


def _project(p, i):
    if not isinstance(p, PairV):
        raise EvalError(f"projection from non-pair {p}")
    return p.left if i == 1 else p.right


def eval_ini(model: Model, env: Optional[dict], t: Term):
    """Kleisli meaning of a one-level term.

    `env` maps each free variable to a *monadic* value; these are sampled
    left to right before the body runs, so the result is one computation.
    """
    k = _Kleisli(model, Layer.INI)
    items = list((env or {}).items())

    def go(i, sampled):
        if i == len(items):
            return k.ev(t, sampled)
        x, mv = items[i]
        return model.bind(mv, lambda v: go(i + 1, {**sampled, x: v}))

    return go(0, {})


def eval_ni(model: Model, env: Optional[dict], t: Term):
    """Kleisli meaning of a sharing-layer term under plain variable values."""
    return _Kleisli(model, Layer.NI).ev(t, dict(env or {}))


class _Plain:
    """Plain evaluation of the independent layer."""

    def __init__(self, model: Model):
        self.m = model
        self.k = _Kleisli(model, Layer.NI)

    def ev(self, t: Term, env: dict) -> Value:
        match t:
            case Var(x):
                if x not in env:
                    raise EvalError(f"unbound variable {x!r}")
                return env[x]
            case PairTensor(a, b):
                return PairV(self.ev(a, env), self.ev(b, env))
            case LetTensor(x, y, a, b):
                p = self.ev(a, env)
                if not isinstance(p, PairV):
                    raise EvalError(f"let (x) on non-pair {p}")
                return self.ev(b, {**env, x: p.left, y: p.right})
            case Inj(i, b, _):
                return TagV(i, self.ev(b, env))
            case Case(s, x, a, y, b):
                v = self.ev(s, env)
                if not isinstance(v, TagV):
                    raise EvalError(f"case on {v}")
                if v.index == 1:
                    return self.ev(a, {**env, x: v.value})
                return self.ev(b, {**env, y: v.value})
            case Lam(x, _, b):
                return _closure(env, x, b, Layer.I)
            case App(f, a):
                c = self.ev(f, env)
                v = self.ev(a, env)
                if not isinstance(c, ClosV):
                    raise EvalError(f"applying non-function {c}")
                return self.ev(c.body, {**dict(c.env), c.param: v})
            case Let(x, a, b):
                return self.ev(b, {**env, x: self.ev(a, env)})
            case Sample(binds, body):
                return MonV(self.sample(binds, body, env))
        raise EvalError(f"{type(t).__name__} cannot be evaluated in the independent layer")

    def sample(self, binds, body, env):
        m = self.m
        comps = []
        for src, _ in binds:
            v = self.ev(src, env)
            if not isinstance(v, MonV):
                raise EvalError(f"sample source evaluated to {v}, not a computation")
            comps.append(v.comp)
        names = [x for _, x in binds]
        if not comps:
            return self.k.ev(body, {})
        if len(comps) == 1:
            return m.bind(comps[0], lambda v: self.k.ev(body, {names[0]: v}))
        joint = comps[0]
        for c in comps[1:]:
            joint = m.pair_product(joint, c)
        n = len(comps)
        return m.bind(joint, lambda tup: self.k.ev(body, dict(zip(names, untuple_value(tup, n)))))


def eval_i(model: Model, env: Optional[dict], t: Term) -> Value:
    """Plain meaning of an independent-layer term (`MonV` at modal types)."""
    return _Plain(model).ev(t, dict(env or {}))


def erase_value(model: Model, v: Value):
    """Collapse the boxes inside an independent-layer value into one computation."""
    match v:
        case MonV(c):
            return c
        case PairV(a, b):
            return model.pair_product(erase_value(model, a), erase_value(model, b))
        case TagV(i, a):
            return model.map(erase_value(model, a), lambda w: TagV(i, w))
        case ClosV():
            raise UnsupportedType("cannot erase a function value")
    return model.unit(v)


def eval_erased(model: Model, env: Optional[dict], t: Term, ty: Optional[Type] = None):
    """Joint computation of an independent-layer term with `M` made transparent.

    Environment values are erased (boxes sampled) left to right first.
    """
    if ty is not None and contains_arrow(ty):
        raise UnsupportedType("observation type contains an arrow")
    k = _Kleisli(model, "erased")
    items = list((env or {}).items())

    def go(i, sampled):
        if i == len(items):
            return k.ev(t, sampled)
        x, v = items[i]
        return model.bind(erase_value(model, v), lambda w: go(i + 1, {**sampled, x: w}))

    return go(0, {})

