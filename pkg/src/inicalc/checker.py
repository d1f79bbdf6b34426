"""Algorithmic typecheckers for the one-level and the two-level calculus.

Affine usage is tracked by threading a `UsageContext` through the
derivation: every check returns the residual context, and a multiplicative
node checks its second premise against the residual of its first.  Additive
premises (the sharing pair, case branches) start from the same context and
their consumption is merged afterwards.  The sharing judgment of the
two-level calculus does no tracking at all.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .syntax import (
    App, BOOL, Case, Const, Inj, Lam, Layer, Let, LetTensor, NAME, PairShared,
    PairTensor, PrimOp, Proj, Sample, Span, TBool, TLolli, TModal, TName,
    TOplus, TProd, TSum, TTensor, Term, Type, UsageContext, Var, is_i_type,
    is_ini_type, is_ni_type, type_children,
)


class ErrorKind(str, Enum):
    UnboundVar = "UnboundVar"
    ReusedVar = "ReusedVar"
    SharedAcrossTensor = "SharedAcrossTensor"
    LayerMismatch = "LayerMismatch"
    Mismatch = "Mismatch"
    NonFunctionApplied = "NonFunctionApplied"
    BadSampleArity = "BadSampleArity"
    PrimUnknown = "PrimUnknown"


class TypeCheckError(Exception):
    def __init__(self, kind: ErrorKind, span: Optional[Span], explanation: str,
                 var: Optional[str] = None, sites: tuple = ()):
        self.kind = kind
        self.span = span
        self.explanation = explanation
        self.var = var
        self.sites = tuple(sites)
        super().__init__(f"{kind.value}: {explanation}")


@dataclass(frozen=True)
class TypingResult:
    type: Type
    trace: tuple  # (rule, span) in preorder
    ctx: UsageContext = field(default_factory=UsageContext, compare=False)


# effectful primitives: name -> (layers, model that provides it, result type)
EFFECT_PRIMS = {
    "coin": ((Layer.INI, Layer.NI), "dist", BOOL),
    "amb": ((Layer.NI,), "pset", BOOL),
    "fresh": ((Layer.NI,), "name", NAME),
}

# pure operations of the sharing layer: name -> (argument type, result type)
PURE_PRIMS = {
    "not": (BOOL, BOOL),
    "and": (TProd(BOOL, BOOL), BOOL),
    "or": (TProd(BOOL, BOOL), BOOL),
    "xor": (TProd(BOOL, BOOL), BOOL),
    "eqb": (TProd(BOOL, BOOL), BOOL),
    "eqn": (TProd(NAME, NAME), BOOL),
}

# the independent layer's operation set is empty
I_PRIMS: dict = {}

MODELS = ("dist", "pset", "name")


def prims_of(model: Optional[str]) -> set:
    """Effectful primitives available under `model` (all of them for None)."""
    return {p for p, (_, m, _) in EFFECT_PRIMS.items() if model is None or m == model}


def _mentions_name(ty: Type) -> bool:
    return isinstance(ty, TName) or any(_mentions_name(c) for c in type_children(ty))


def _show(ty: Type) -> str:
    from .parser import show_type
    return show_type(ty)


_LAYER_OK = {Layer.INI: is_ini_type, Layer.NI: is_ni_type, Layer.I: is_i_type}


class _Checker:
    def __init__(self, model: Optional[str]):
        if model is not None and model not in MODELS:
            raise ValueError(f"unknown model {model!r}")
        self.model = model
        self.trace: list = []

    def rule(self, name: str, t: Term):
        self.trace.append((name, t.span))

    def err(self, kind, t, msg, **kw):
        raise TypeCheckError(kind, t.span if t is not None else None, msg, **kw)

    def check_type_ok(self, ty: Type, layer: Layer, t: Term):
        if not _LAYER_OK[layer](ty):
            self.err(ErrorKind.LayerMismatch, t, f"type {_show(ty)} is not a {layer.value} type")
        if self.model not in (None, "name") and _mentions_name(ty):
            self.err(ErrorKind.PrimUnknown, t, f"type Name needs the name model, not {self.model}")

    def expect(self, got: Type, expected: Optional[Type], t: Term) -> Type:
        if expected is not None and got != expected:
            self.err(ErrorKind.Mismatch, t, f"expected {_show(expected)}, found {_show(got)}")
        return got

    def effect_prim(self, t: PrimOp, layer: Layer) -> Type:
        if t.op not in EFFECT_PRIMS:
            self.err(ErrorKind.PrimUnknown, t, f"unknown primitive {t.op!r}")
        layers, _, ty = EFFECT_PRIMS[t.op]
        if layer not in layers:
            self.err(ErrorKind.PrimUnknown, t, f"{t.op} is not available in layer {layer.value}")
        if t.op not in prims_of(self.model):
            self.err(ErrorKind.PrimUnknown, t, f"{t.op} is not provided by the {self.model} model")
        return ty

    # -- sequencing helper for multiplicative nodes -------------------------
    def second_premise(self, fn, before: UsageContext, after_first: UsageContext, shared_kind):
        """Run `fn`; reclassify reuse of a variable the first premise took."""
        try:
            return fn()
        except TypeCheckError as e:
            if e.kind is ErrorKind.ReusedVar and shared_kind is not None and e.var is not None:
                hit0 = before.lookup(e.var)
                hit1 = after_first.lookup(e.var)
                if hit0 and hit1 and not hit0[1].consumed and hit1[1].consumed:
                    raise TypeCheckError(shared_kind, e.span,
                                         f"variable {e.var!r} is used on both sides of a "
                                         f"separating construct", e.var, e.sites) from None
            raise

    # -- variables (shared by the affine judgments) --------------------------
    def use_var(self, ctx: UsageContext, t: Var, layer: Layer):
        hit = ctx.lookup(t.name)
        if hit is None:
            self.err(ErrorKind.UnboundVar, t, f"unbound variable {t.name!r}", var=t.name)
        i, e = hit
        if not _LAYER_OK[layer](e.type):
            self.err(ErrorKind.LayerMismatch, t,
                     f"{t.name!r} has type {_show(e.type)}, not a {layer.value} type", var=t.name)
        if e.consumed:
            self.err(ErrorKind.ReusedVar, t, f"variable {t.name!r} used more than once",
                     var=t.name, sites=(e.consumed_at, t.span))
        return e.type, ctx.consume(i, t.span)

    # ======================================================================
    # one-level calculus
    # ======================================================================
    def ini(self, ctx: UsageContext, t: Term, expected: Optional[Type]):
        match t:
            case Var():
                self.rule("Var", t)
                ty, ctx = self.use_var(ctx, t, Layer.INI)
                return self.expect(ty, expected, t), ctx
            case Const():
                self.rule("Const", t)
                return self.expect(BOOL, expected, t), ctx
            case PrimOp(op, ()) if op in EFFECT_PRIMS:
                self.rule("Coin", t)
                return self.expect(self.effect_prim(t, Layer.INI), expected, t), ctx
            case PrimOp():
                self.err(ErrorKind.PrimUnknown, t, f"{t.op} is not an operation of the one-level calculus")
            case PairShared(a, b):
                self.rule("×Intro", t)
                ea, eb = (expected.left, expected.right) if isinstance(expected, TProd) else (None, None)
                ta, ca = self.ini(ctx, a, ea)
                tb, cb = self.ini(ctx, b, eb)
                return self.expect(TProd(ta, tb), expected, t), ca.merge(cb)
            case Proj(i, b):
                self.rule(f"×Elim{i}", t)
                tb, ctx = self.ini(ctx, b, None)
                if not isinstance(tb, TProd):
                    self.err(ErrorKind.Mismatch, t, f"projection from non-product {_show(tb)}")
                return self.expect(tb.left if i == 1 else tb.right, expected, t), ctx
            case PairTensor(a, b):
                self.rule("⊗Intro", t)
                ea, eb = (expected.left, expected.right) if isinstance(expected, TTensor) else (None, None)
                ta, c1 = self.ini(ctx, a, ea)
                tb, c2 = self.second_premise(lambda: self.ini(c1, b, eb), ctx, c1,
                                             ErrorKind.SharedAcrossTensor)
                return self.expect(TTensor(ta, tb), expected, t), c2
            case LetTensor(x, y, a, b):
                self.rule("⊗Elim", t)
                ta, c1 = self.ini(ctx, a, None)
                if not isinstance(ta, TTensor):
                    self.err(ErrorKind.Mismatch, t, f"let (x) on non-tensor {_show(ta)}")
                n = len(c1)
                inner = c1.extend(x, ta.left).extend(y, ta.right)
                tb, c2 = self.second_premise(lambda: self.ini(inner, b, expected), ctx, c1, None)
                return tb, c2.truncate(n)
            case Lam(x, ann, b):
                self.rule("Abstraction", t)
                self.check_type_ok(ann, Layer.INI, t)
                eb = expected.res if isinstance(expected, TLolli) else None
                n = len(ctx)
                tb, c1 = self.ini(ctx.extend(x, ann), b, eb)
                return self.expect(TLolli(ann, tb), expected, t), c1.truncate(n)
            case App(f, a):
                self.rule("Application", t)
                tf, c1 = self.ini(ctx, f, None)
                if not isinstance(tf, TLolli):
                    self.err(ErrorKind.NonFunctionApplied, t, f"applying a value of type {_show(tf)}")
                _, c2 = self.second_premise(lambda: self.ini(c1, a, tf.arg), ctx, c1,
                                            ErrorKind.SharedAcrossTensor)
                return self.expect(tf.res, expected, t), c2
            case Let(x, a, b):
                # sugar for (fn x => b) a, checked argument first
                self.rule("Application", t)
                self.rule("Abstraction", t)
                ta, c1 = self.ini(ctx, a, None)
                n = len(c1)
                tb, c2 = self.second_premise(lambda: self.ini(c1.extend(x, ta), b, expected), ctx, c1,
                                             ErrorKind.SharedAcrossTensor)
                return tb, c2.truncate(n)
            case Case() | Inj() | Sample():
                self.err(ErrorKind.LayerMismatch, t,
                         f"{type(t).__name__} is not part of the one-level calculus")
        raise TypeError(f"not a term: {t!r}")

    # ======================================================================
    # sharing layer (no usage tracking)
    # ======================================================================
    def ni(self, ctx: UsageContext, t: Term, expected: Optional[Type]) -> Type:
        match t:
            case Var(x):
                self.rule("Var", t)
                hit = ctx.lookup(x)
                if hit is None:
                    self.err(ErrorKind.UnboundVar, t, f"unbound variable {x!r}", var=x)
                ty = hit[1].type
                if not is_ni_type(ty):
                    self.err(ErrorKind.LayerMismatch, t,
                             f"{x!r} has type {_show(ty)}, which lives in the independent layer", var=x)
                return self.expect(ty, expected, t)
            case Const():
                self.rule("Const", t)
                return self.expect(BOOL, expected, t)
            case PrimOp(op, ()):
                self.rule("Primitive", t)
                if op in PURE_PRIMS:
                    self.err(ErrorKind.Mismatch, t, f"{op} needs an argument")
                return self.expect(self.effect_prim(t, Layer.NI), expected, t)
            case PrimOp(op, (a,)):
                self.rule("Primitive", t)
                if op not in PURE_PRIMS:
                    self.err(ErrorKind.PrimUnknown, t, f"unknown operation {op!r}")
                arg, res = PURE_PRIMS[op]
                if self.model not in (None, "name") and _mentions_name(arg):
                    self.err(ErrorKind.PrimUnknown, t, f"{op} needs the name model")
                self.ni(ctx, a, arg)
                return self.expect(res, expected, t)
            case PairShared(a, b):
                self.rule("×Intro", t)
                ea, eb = (expected.left, expected.right) if isinstance(expected, TProd) else (None, None)
                return self.expect(TProd(self.ni(ctx, a, ea), self.ni(ctx, b, eb)), expected, t)
            case Proj(i, b):
                self.rule(f"×Elim{i}", t)
                tb = self.ni(ctx, b, None)
                if not isinstance(tb, TProd):
                    self.err(ErrorKind.Mismatch, t, f"projection from non-product {_show(tb)}")
                return self.expect(tb.left if i == 1 else tb.right, expected, t)
            case Let(x, a, b):
                self.rule("Let", t)
                ta = self.ni(ctx, a, None)
                return self.ni(ctx.extend(x, ta), b, expected)
            case Inj(i, b, ann):
                self.rule(f"+Intro{i}", t)
                sum_ty = self.inj_type(t, ann, expected, TSum, Layer.NI)
                self.ni(ctx, b, sum_ty.left if i == 1 else sum_ty.right)
                return sum_ty
            case Case(s, x, a, y, b):
                self.rule("+Elim", t)
                ts = self.ni(ctx, s, None)
                if isinstance(ts, TBool):
                    lx, ry = BOOL, BOOL
                elif isinstance(ts, TSum):
                    lx, ry = ts.left, ts.right
                else:
                    self.err(ErrorKind.Mismatch, t, f"case on non-sum {_show(ts)}")
                return self.branches(lambda e: self.ni(ctx.extend(x, lx), a, e),
                                     lambda e: self.ni(ctx.extend(y, ry), b, e), expected)
            case PairTensor() | LetTensor() | Lam() | App() | Sample():
                self.err(ErrorKind.LayerMismatch, t,
                         f"{type(t).__name__} belongs to the independent layer, not the sharing layer")
        raise TypeError(f"not a term: {t!r}")

    def inj_type(self, t, ann, expected, sum_cls, layer):
        if ann is not None:
            self.check_type_ok(ann, layer, t)
            if not isinstance(ann, sum_cls):
                kind = ErrorKind.LayerMismatch if isinstance(ann, (TSum, TOplus)) else ErrorKind.Mismatch
                self.err(kind, t, f"injection annotated with non-sum {_show(ann)}")
            return self.expect(ann, expected, t)
        if isinstance(expected, sum_cls):
            return expected
        if expected is not None:
            self.err(ErrorKind.Mismatch, t, f"injection where {_show(expected)} was expected")
        self.err(ErrorKind.Mismatch, t, "cannot infer the sum type of an injection; write inl[T] or inr[T]")

    def branches(self, left, right, expected):
        """Type two case branches, letting either side fix an unknown type."""
        mark = len(self.trace)
        try:
            tl = left(expected)
        except TypeCheckError as e:
            if expected is not None or "cannot infer" not in e.explanation:
                raise
            del self.trace[mark:]
            tr = right(None)
            rtrace = self.trace[mark:]
            del self.trace[mark:]
            left(tr)
            self.trace.extend(rtrace)
            return tr
        right(tl)
        return tl

    # ======================================================================
    # independent layer (affine)
    # ======================================================================
    def i(self, ctx: UsageContext, t: Term, expected: Optional[Type]):
        match t:
            case Var():
                self.rule("Var", t)
                ty, ctx = self.use_var(ctx, t, Layer.I)
                return self.expect(ty, expected, t), ctx
            case PrimOp(op, _):
                # no independent-layer operations exist, so every primitive is misplaced here
                self.err(ErrorKind.LayerMismatch, t,
                         f"{op} is a sharing-layer primitive; import it with `sample as in {op}`")
            case Const() | PairShared() | Proj():
                self.err(ErrorKind.LayerMismatch, t,
                         f"{type(t).__name__} belongs to the sharing layer; use sample to import it")
            case PairTensor(a, b):
                self.rule("⊗Intro", t)
                ea, eb = (expected.left, expected.right) if isinstance(expected, TTensor) else (None, None)
                ta, c1 = self.i(ctx, a, ea)
                tb, c2 = self.second_premise(lambda: self.i(c1, b, eb), ctx, c1,
                                             ErrorKind.SharedAcrossTensor)
                return self.expect(TTensor(ta, tb), expected, t), c2
            case LetTensor(x, y, a, b):
                self.rule("⊗Elim", t)
                ta, c1 = self.i(ctx, a, None)
                if not isinstance(ta, TTensor):
                    self.err(ErrorKind.Mismatch, t, f"let (x) on non-tensor {_show(ta)}")
                n = len(c1)
                inner = c1.extend(x, ta.left).extend(y, ta.right)
                tb, c2 = self.second_premise(lambda: self.i(inner, b, expected), ctx, c1, None)
                return tb, c2.truncate(n)
            case Inj(k, b, ann):
                self.rule(f"⊕Intro{k}", t)
                sum_ty = self.inj_type(t, ann, expected, TOplus, Layer.I)
                _, c1 = self.i(ctx, b, sum_ty.left if k == 1 else sum_ty.right)
                return sum_ty, c1
            case Case(s, x, a, y, b):
                self.rule("⊕Elim", t)
                ts, c1 = self.i(ctx, s, None)
                if not isinstance(ts, TOplus):
                    kind = ErrorKind.LayerMismatch if isinstance(ts, TModal) else ErrorKind.Mismatch
                    self.err(kind, t, f"case on {_show(ts)}; only (+) can be eliminated here"
                             + ("; sample the computation first" if kind is ErrorKind.LayerMismatch else ""))
                n = len(c1)
                out = {}

                def left(e):
                    ty, cl = self.second_premise(lambda: self.i(c1.extend(x, ts.left), a, e), ctx, c1, None)
                    out["l"] = cl.truncate(n)
                    return ty

                def right(e):
                    ty, cr = self.second_premise(lambda: self.i(c1.extend(y, ts.right), b, e), ctx, c1, None)
                    out["r"] = cr.truncate(n)
                    return ty

                ty = self.branches(left, right, expected)
                return ty, out["l"].merge(out["r"])
            case Lam(x, ann, b):
                self.rule("Abstraction", t)
                self.check_type_ok(ann, Layer.I, t)
                eb = expected.res if isinstance(expected, TLolli) else None
                n = len(ctx)
                tb, c1 = self.i(ctx.extend(x, ann), b, eb)
                return self.expect(TLolli(ann, tb), expected, t), c1.truncate(n)
            case App(f, a):
                self.rule("Application", t)
                tf, c1 = self.i(ctx, f, None)
                if not isinstance(tf, TLolli):
                    self.err(ErrorKind.NonFunctionApplied, t, f"applying a value of type {_show(tf)}")
                _, c2 = self.second_premise(lambda: self.i(c1, a, tf.arg), ctx, c1,
                                            ErrorKind.SharedAcrossTensor)
                return self.expect(tf.res, expected, t), c2
            case Let(x, a, b):
                self.rule("Application", t)
                self.rule("Abstraction", t)
                ta, c1 = self.i(ctx, a, None)
                n = len(c1)
                tb, c2 = self.second_premise(lambda: self.i(c1.extend(x, ta), b, expected), ctx, c1,
                                             ErrorKind.SharedAcrossTensor)
                return tb, c2.truncate(n)
            case Sample(binds, body):
                self.rule("Sample", t)
                if any(not isinstance(bd, tuple) or len(bd) != 2 for bd in binds):
                    self.err(ErrorKind.BadSampleArity, t, "sample bindings must pair each source with a name")
                names = [x for _, x in binds]
                if len(set(names)) != len(names):
                    self.err(ErrorKind.BadSampleArity, t,
                             f"sample binds {len(names)} sources to only {len(set(names))} distinct names")
                inner = []
                cur = ctx
                for src, x in binds:
                    ts, cur = self.i(cur, src, None)
                    if not isinstance(ts, TModal):
                        self.err(ErrorKind.Mismatch, src, f"sample source has type {_show(ts)}, not M _")
                    inner.append((x, ts.inner))
                eb = expected.inner if isinstance(expected, TModal) else None
                tb = self.ni(UsageContext.of(*inner), body, eb)
                return self.expect(TModal(tb), expected, t), cur
        raise TypeError(f"not a term: {t!r}")


def _ctx(ctx) -> UsageContext:
    if ctx is None:
        return UsageContext()
    if isinstance(ctx, UsageContext):
        return ctx
    return UsageContext.of(*ctx)


def _validate_ctx(ch: _Checker, ctx: UsageContext, layer: Layer):
    for e in ctx:
        ch.check_type_ok(e.type, layer, Var(e.name))


def check_ini(ctx, t: Term, expected: Optional[Type] = None, model: Optional[str] = None) -> TypingResult:
    """Type `t` in the one-level calculus; raises `TypeCheckError`."""
    ch = _Checker(model)
    ctx = _ctx(ctx)
    _validate_ctx(ch, ctx, Layer.INI)
    ty, out = ch.ini(ctx, t, expected)
    return TypingResult(ty, tuple(ch.trace), out)


def check_ni(ctx, t: Term, expected: Optional[Type] = None, model: Optional[str] = None) -> TypingResult:
    """Type `t` in the sharing layer; raises `TypeCheckError`."""
    ch = _Checker(model)
    ctx = _ctx(ctx)
    _validate_ctx(ch, ctx, Layer.NI)
    ty = ch.ni(ctx, t, expected)
    return TypingResult(ty, tuple(ch.trace), ctx)


def check_i(ctx, t: Term, expected: Optional[Type] = None, model: Optional[str] = None) -> TypingResult:
    """Type `t` in the independent layer; raises `TypeCheckError`."""
    ch = _Checker(model)
    ctx = _ctx(ctx)
    _validate_ctx(ch, ctx, Layer.I)
    ty, out = ch.i(ctx, t, expected)
    return TypingResult(ty, tuple(ch.trace), out)


CHECKERS = {Layer.INI: check_ini, Layer.NI: check_ni, Layer.I: check_i}


def check(layer: Layer, ctx, t: Term, expected: Optional[Type] = None,
          model: Optional[str] = None) -> TypingResult:
    return CHECKERS[layer](ctx, t, expected, model)


def accepts(layer: Layer, ctx, t: Term, expected: Optional[Type] = None,
            model: Optional[str] = None) -> bool:
    try:
        check(layer, ctx, t, expected, model)
    except TypeCheckError:
        return False
    return True


def check_file(sf, model: Optional[str] = None) -> TypingResult:
    """Check a parsed source file: assumptions form the context."""
    return check(sf.layer, list(sf.assumptions), sf.elaborated(), None, model)
