"""Declarative typing by brute force, used as an oracle for the checker.

Where the algorithmic checker threads consumption, this module guesses: at
every multiplicative node it tries each way of handing the relevant context
variables to the premises.  Variables not free in a node can be dropped
(weakening), so only free variables are distributed.  Exponential, which is
fine for the small terms it is pointed at.
"""

from __future__ import annotations

import itertools
from typing import Optional

from .checker import EFFECT_PRIMS, PURE_PRIMS, TypeCheckError, check, prims_of
from .syntax import (
    App, BOOL, Case, Const, Inj, Lam, Layer, Let, LetTensor, PairShared,
    PairTensor, PrimOp, Proj, Sample, TBool, TLolli, TModal, TOplus, TProd,
    TSum, TTensor, Term, Type, UsageContext, children, free_vars, is_i_type,
    is_ini_type, is_ni_type,
)
from . import syntax as S

_OK = {Layer.INI: is_ini_type, Layer.NI: is_ni_type, Layer.I: is_i_type}


def _splits(ctx: dict, parts: list):
    """Every assignment of the relevant variables to exactly one premise.

    `parts` lists the terms (with their locally bound names removed) whose
    free variables compete for the context.
    """
    relevant = sorted(set().union(*parts) & ctx.keys())
    for choice in itertools.product(range(len(parts)), repeat=len(relevant)):
        yield [
            {v: ctx[v] for v, c in zip(relevant, choice) if c == k}
            | {v: ty for v, ty in ctx.items() if v not in relevant}
            for k in range(len(parts))
        ]


class _Decl:
    def __init__(self, model):
        self.model = model

    def eq(self, got, expected):
        if got is None:
            return None
        if expected is not None and got != expected:
            return None
        return got

    # one-level calculus -------------------------------------------------
    def ini(self, ctx: dict, t: Term, exp: Optional[Type]):
        match t:
            case S.Var(x):
                return self.eq(ctx.get(x), exp)
            case Const():
                return self.eq(BOOL, exp)
            case PrimOp(op, ()) if op in EFFECT_PRIMS:
                if Layer.INI not in EFFECT_PRIMS[op][0] or op not in prims_of(self.model):
                    return None
                return self.eq(EFFECT_PRIMS[op][2], exp)
            case PairShared(a, b):
                ea, eb = (exp.left, exp.right) if isinstance(exp, TProd) else (None, None)
                ta, tb = self.ini(ctx, a, ea), self.ini(ctx, b, eb)
                return self.eq(TProd(ta, tb), exp) if ta and tb else None
            case Proj(i, b):
                tb = self.ini(ctx, b, None)
                if not isinstance(tb, TProd):
                    return None
                return self.eq(tb.left if i == 1 else tb.right, exp)
            case PairTensor(a, b):
                ea, eb = (exp.left, exp.right) if isinstance(exp, TTensor) else (None, None)
                for g1, g2 in _splits(ctx, [free_vars(a), free_vars(b)]):
                    ta, tb = self.ini(g1, a, ea), self.ini(g2, b, eb)
                    if ta and tb:
                        return self.eq(TTensor(ta, tb), exp)
                return None
            case LetTensor(x, y, a, b):
                for g1, g2 in _splits(ctx, [free_vars(a), free_vars(b) - {x, y}]):
                    ta = self.ini(g1, a, None)
                    if not isinstance(ta, TTensor):
                        continue
                    tb = self.ini({**g2, x: ta.left, y: ta.right}, b, exp)
                    if tb:
                        return tb
                return None
            case Lam(x, ann, b):
                if not is_ini_type(ann) or (self.model not in (None, "name") and _has_name(ann)):
                    return None
                tb = self.ini({**ctx, x: ann}, b, exp.res if isinstance(exp, TLolli) else None)
                return self.eq(TLolli(ann, tb), exp) if tb else None
            case App(f, a):
                for g1, g2 in _splits(ctx, [free_vars(f), free_vars(a)]):
                    tf = self.ini(g1, f, None)
                    if isinstance(tf, TLolli) and self.ini(g2, a, tf.arg):
                        return self.eq(tf.res, exp)
                return None
            case Let(x, a, b):
                for g1, g2 in _splits(ctx, [free_vars(a), free_vars(b) - {x}]):
                    ta = self.ini(g1, a, None)
                    if ta is None:
                        continue
                    tb = self.ini({**g2, x: ta}, b, exp)
                    if tb:
                        return tb
                return None
        return None

    # sharing layer -------------------------------------------------------
    def ni(self, ctx: dict, t: Term, exp: Optional[Type]):
        match t:
            case S.Var(x):
                ty = ctx.get(x)
                return self.eq(ty, exp) if ty is not None and is_ni_type(ty) else None
            case Const():
                return self.eq(BOOL, exp)
            case PrimOp(op, ()):
                if op not in EFFECT_PRIMS or Layer.NI not in EFFECT_PRIMS[op][0]:
                    return None
                if op not in prims_of(self.model):
                    return None
                return self.eq(EFFECT_PRIMS[op][2], exp)
            case PrimOp(op, (a,)):
                if op not in PURE_PRIMS:
                    return None
                arg, res = PURE_PRIMS[op]
                if self.model not in (None, "name") and _has_name(arg):
                    return None
                return self.eq(res, exp) if self.ni(ctx, a, arg) else None
            case PairShared(a, b):
                ea, eb = (exp.left, exp.right) if isinstance(exp, TProd) else (None, None)
                ta, tb = self.ni(ctx, a, ea), self.ni(ctx, b, eb)
                return self.eq(TProd(ta, tb), exp) if ta and tb else None
            case Proj(i, b):
                tb = self.ni(ctx, b, None)
                if not isinstance(tb, TProd):
                    return None
                return self.eq(tb.left if i == 1 else tb.right, exp)
            case Let(x, a, b):
                ta = self.ni(ctx, a, None)
                return self.ni({**ctx, x: ta}, b, exp) if ta else None
            case Inj(i, b, ann):
                st = self.sum_type(ann, exp, TSum, Layer.NI)
                if st is None:
                    return None
                return st if self.ni(ctx, b, st.left if i == 1 else st.right) else None
            case Case(s, x, a, y, b):
                ts = self.ni(ctx, s, None)
                if isinstance(ts, TBool):
                    lx, ry = BOOL, BOOL
                elif isinstance(ts, TSum):
                    lx, ry = ts.left, ts.right
                else:
                    return None
                return _branches(lambda e: self.ni({**ctx, x: lx}, a, e),
                                 lambda e: self.ni({**ctx, y: ry}, b, e), exp)
        return None

    def sum_type(self, ann, exp, cls, layer):
        if ann is not None:
            if not isinstance(ann, cls) or not _OK[layer](ann):
                return None
            if self.model not in (None, "name") and _has_name(ann):
                return None
            return self.eq(ann, exp)
        return exp if isinstance(exp, cls) else None

    # independent layer ---------------------------------------------------
    def i(self, ctx: dict, t: Term, exp: Optional[Type]):
        match t:
            case S.Var(x):
                ty = ctx.get(x)
                return self.eq(ty, exp) if ty is not None and is_i_type(ty) else None
            case PairTensor(a, b):
                ea, eb = (exp.left, exp.right) if isinstance(exp, TTensor) else (None, None)
                for g1, g2 in _splits(ctx, [free_vars(a), free_vars(b)]):
                    ta, tb = self.i(g1, a, ea), self.i(g2, b, eb)
                    if ta and tb:
                        return self.eq(TTensor(ta, tb), exp)
                return None
            case LetTensor(x, y, a, b):
                for g1, g2 in _splits(ctx, [free_vars(a), free_vars(b) - {x, y}]):
                    ta = self.i(g1, a, None)
                    if not isinstance(ta, TTensor):
                        continue
                    tb = self.i({**g2, x: ta.left, y: ta.right}, b, exp)
                    if tb:
                        return tb
                return None
            case Inj(k, b, ann):
                st = self.sum_type(ann, exp, TOplus, Layer.I)
                if st is None:
                    return None
                return st if self.i(ctx, b, st.left if k == 1 else st.right) else None
            case Case(s, x, a, y, b):
                rest = (free_vars(a) - {x}) | (free_vars(b) - {y})
                for g1, g2 in _splits(ctx, [free_vars(s), rest]):
                    ts = self.i(g1, s, None)
                    if not isinstance(ts, TOplus):
                        continue
                    out = _branches(lambda e: self.i({**g2, x: ts.left}, a, e),
                                    lambda e: self.i({**g2, y: ts.right}, b, e), exp)
                    if out:
                        return out
                return None
            case Lam(x, ann, b):
                if not is_i_type(ann) or (self.model not in (None, "name") and _has_name(ann)):
                    return None
                tb = self.i({**ctx, x: ann}, b, exp.res if isinstance(exp, TLolli) else None)
                return self.eq(TLolli(ann, tb), exp) if tb else None
            case App(f, a):
                for g1, g2 in _splits(ctx, [free_vars(f), free_vars(a)]):
                    tf = self.i(g1, f, None)
                    if isinstance(tf, TLolli) and self.i(g2, a, tf.arg):
                        return self.eq(tf.res, exp)
                return None
            case Let(x, a, b):
                for g1, g2 in _splits(ctx, [free_vars(a), free_vars(b) - {x}]):
                    ta = self.i(g1, a, None)
                    if ta is None:
                        continue
                    tb = self.i({**g2, x: ta}, b, exp)
                    if tb:
                        return tb
                return None
            case Sample(binds, body):
                names = [x for _, x in binds]
                if len(set(names)) != len(names):
                    return None
                srcs = [s for s, _ in binds]
                inner_exp = exp.inner if isinstance(exp, TModal) else None
                if srcs:
                    splits = _splits(ctx, [free_vars(s) for s in srcs])
                else:
                    splits = [[]]
                for gs in splits:
                    tys = [self.i(g, s, None) for g, s in zip(gs, srcs)]
                    if not all(isinstance(ty, TModal) for ty in tys):
                        continue
                    tb = self.ni(dict(zip(names, (ty.inner for ty in tys))), body, inner_exp)
                    if tb:
                        return self.eq(TModal(tb), exp)
                return None
        return None


def _has_name(ty) -> bool:
    return isinstance(ty, S.TName) or any(_has_name(c) for c in S.type_children(ty))


def _branches(left, right, exp):
    tl = left(exp)
    if tl is not None:
        return tl if right(tl) else None
    if exp is not None:
        return None
    tr = right(None)
    if tr is None:
        return None
    return tr if left(tr) else None


def declarative_type(layer: Layer, ctx, t: Term, expected: Optional[Type] = None,
                     model: Optional[str] = None) -> Optional[Type]:
    """Type of `t` if some choice of context splits derives it, else None."""
    if isinstance(ctx, UsageContext):
        pairs = [(e.name, e.type) for e in ctx]
    else:
        pairs = list(ctx or [])
    if any(not _OK[layer](ty) for _, ty in pairs):
        return None
    if model not in (None, "name") and any(_has_name(ty) for _, ty in pairs):
        return None
    d = _Decl(model)
    return {Layer.INI: d.ini, Layer.NI: d.ni, Layer.I: d.i}[layer](dict(pairs), t, expected)


# ---------------------------------------------------------------------------
# Derivation replay
# ---------------------------------------------------------------------------

_INI_RULES = {
    S.Var: "Var", Const: "Const", PrimOp: "Coin", PairShared: "×Intro", PairTensor: "⊗Intro",
    LetTensor: "⊗Elim", Lam: "Abstraction", App: "Application",
}
_NI_RULES = {S.Var: "Var", Const: "Const", PrimOp: "Primitive", PairShared: "×Intro",
             Let: "Let", Case: "+Elim"}
_I_RULES = {S.Var: "Var", PairTensor: "⊗Intro", LetTensor: "⊗Elim", Case: "⊕Elim",
            Lam: "Abstraction", App: "Application", Sample: "Sample"}


def expected_rules(layer: Layer, t: Term) -> list:
    """Rule names a derivation of `t` must use, in preorder."""
    out: list = []

    def walk(u: Term, lay: Layer):
        match u:
            case Let() if lay is not Layer.NI:
                out.append(("Application", u))
                out.append(("Abstraction", u))
            case Proj(i, _):
                out.append((f"×Elim{i}", u))
            case Inj(i, _, _):
                out.append((f"+Intro{i}" if lay is Layer.NI else f"⊕Intro{i}", u))
            case _:
                table = {Layer.INI: _INI_RULES, Layer.NI: _NI_RULES, Layer.I: _I_RULES}[lay]
                out.append((table[type(u)], u))
        if isinstance(u, Sample):
            for s, _ in u.bindings:
                walk(s, lay)
            walk(u.body, Layer.NI)
            return
        for c in children(u):
            walk(c, lay)

    walk(t, layer)
    return out


class ReplayError(Exception):
    pass


def replay(layer: Layer, ctx, t: Term, model: Optional[str] = None):
    """Re-run the checker and validate its trace against the declarative rules.

    The trace must list exactly the rules the term's node kinds demand, in
    preorder and at the nodes' spans, and the brute-force declarative search
    must derive the same type.  Returns the checked type.
    """
    res = check(layer, ctx, t, None, model)
    want = expected_rules(layer, t)
    if len(want) != len(res.trace):
        raise ReplayError(f"trace has {len(res.trace)} steps, term needs {len(want)}")
    for (rule, span), (need, node) in zip(res.trace, want):
        if rule != need:
            raise ReplayError(f"trace step {rule} where {need} was required")
        if span != node.span:
            raise ReplayError(f"trace step {rule} at {span}, node at {node.span}")
    if not res.trace:
        raise ReplayError("empty derivation")
    dty = declarative_type(layer, ctx, t, None, model)
    if dty != res.type:
        raise ReplayError(f"declarative search finds {dty}, checker found {res.type}")
    return res.type


def agree(layer: Layer, ctx, t: Term, model: Optional[str] = None) -> tuple:
    """(algorithmic verdict, declarative verdict) for one term."""
    try:
        alg = check(layer, ctx, t, None, model).type
    except TypeCheckError:
        alg = None
    return alg, declarative_type(layer, ctx, t, None, model)

