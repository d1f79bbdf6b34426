"""Embeddings of one-level terms into the two-level calculus.

`translate_t` sends the arrow-free fragment into the sharing layer, merging
both products into ``*``.  `translate_t_prime` sends the multiplicative
fragment into the independent layer, boxing base types as ``M Bool``.  Both
are homomorphic on terms; where a node has no counterpart in the target
grammar it is mapped to the evident encoding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .checker import check_ini, check_i, check_ni
from .evaluator import UnsupportedType, eval_erased, eval_ini, eval_ni
from .models import Model
from .syntax import (
    App, BOOL, Const, Lam, Layer, Let, LetTensor, PairShared, PairTensor,
    PrimOp, Proj, Sample, TBool, TLolli, TModal, TProd, TTensor, Term, Type,
    Var, all_names, contains_arrow, free_vars, fresh_name, subterms,
    type_children, with_layer,
)


class Fragment(str, Enum):
    ArrowFree = "ArrowFree"
    Multiplicative = "Multiplicative"


class NotInFragment(Exception):
    pass


def _types_in(t: Term):
    for s in subterms(t):
        if isinstance(s, Lam):
            yield s.annot


def _has(ty: Type, cls) -> bool:
    return isinstance(ty, cls) or any(_has(c, cls) for c in type_children(ty))


def classify_fragment(t: Term, ty: Optional[Type] = None) -> set:
    """Fragments `t` belongs to (empty set: neither).

    `let` counts as part of both fragments: it is sugar whose translation
    is `let` in the sharing layer and in the independent layer alike.
    """
    nodes = list(subterms(t))
    tys = list(_types_in(t)) + ([ty] if ty is not None else [])
    tags = set()
    if not any(isinstance(s, (Lam, App)) for s in nodes) and not any(_has(x, TLolli) for x in tys):
        tags.add(Fragment.ArrowFree)
    if not any(isinstance(s, (PairShared, Proj)) for s in nodes) and not any(_has(x, TProd) for x in tys):
        tags.add(Fragment.Multiplicative)
    return tags


def preferred_fragment(t: Term, ty: Optional[Type] = None) -> Optional[Fragment]:
    tags = classify_fragment(t, ty)
    if Fragment.ArrowFree in tags:
        return Fragment.ArrowFree
    return next(iter(tags), None)


# ---------------------------------------------------------------------------
# T: arrow-free fragment -> sharing layer
# ---------------------------------------------------------------------------


def type_t(ty: Type) -> Type:
    match ty:
        case TBool():
            return BOOL
        case TProd(a, b) | TTensor(a, b):
            return TProd(type_t(a), type_t(b))
    raise NotInFragment(f"type {ty} is outside the arrow-free fragment")


def _term_t(t: Term) -> Term:
    match t:
        case Var() | Const() | PrimOp():
            return t
        case PairShared(a, b) | PairTensor(a, b):
            return PairShared(_term_t(a), _term_t(b))
        case Proj(i, b):
            return Proj(i, _term_t(b))
        case Let(x, a, b):
            return Let(x, _term_t(a), _term_t(b))
        case LetTensor(x, y, a, b):
            a2, b2 = _term_t(a), _term_t(b)
            p = fresh_name("p", all_names(b2) | free_vars(a2) | {x, y})
            return Let(p, a2, Let(x, Proj(1, Var(p)), Let(y, Proj(2, Var(p)), b2)))
    raise NotInFragment(f"{type(t).__name__} is outside the arrow-free fragment")


def translate_t(t: Term, ty: Optional[Type] = None, ctx=None) -> tuple:
    """(sharing-layer term, its type) for an arrow-free one-level term."""
    if ty is None:
        ty = check_ini(ctx, t).type
    if Fragment.ArrowFree not in classify_fragment(t, ty):
        raise NotInFragment("term is not in the arrow-free fragment")
    return with_layer(_term_t(t), Layer.NI), type_t(ty)


# ---------------------------------------------------------------------------
# T': multiplicative fragment -> independent layer
# ---------------------------------------------------------------------------


def type_t_prime(ty: Type) -> Type:
    match ty:
        case TBool():
            return TModal(BOOL)
        case TTensor(a, b):
            return TTensor(type_t_prime(a), type_t_prime(b))
        case TLolli(a, b):
            return TLolli(type_t_prime(a), type_t_prime(b))
    raise NotInFragment(f"type {ty} is outside the multiplicative fragment")


def _box(t: Term) -> Sample:
    return Sample((), with_layer(t, Layer.NI), layer=Layer.I)


def _term_t_prime(t: Term) -> Term:
    match t:
        case Var():
            return t
        case Const() | PrimOp():
            return _box(t)
        case PairTensor(a, b):
            return PairTensor(_term_t_prime(a), _term_t_prime(b))
        case LetTensor(x, y, a, b):
            return LetTensor(x, y, _term_t_prime(a), _term_t_prime(b))
        case Lam(x, ann, b):
            return Lam(x, type_t_prime(ann), _term_t_prime(b))
        case App(f, a):
            return App(_term_t_prime(f), _term_t_prime(a))
        case Let(x, a, b):
            return Let(x, _term_t_prime(a), _term_t_prime(b))
    raise NotInFragment(f"{type(t).__name__} is outside the multiplicative fragment")


def translate_t_prime(t: Term, ty: Optional[Type] = None, ctx=None) -> tuple:
    """(independent-layer term, its type) for a multiplicative one-level term."""
    if ty is None:
        ty = check_ini(ctx, t).type
    if Fragment.Multiplicative not in classify_fragment(t, ty):
        raise NotInFragment("term is not in the multiplicative fragment")
    return with_layer(_term_t_prime(t), Layer.I), type_t_prime(ty)


def translate(t: Term, fragment: Fragment, ty: Optional[Type] = None, ctx=None) -> tuple:
    if fragment is Fragment.ArrowFree:
        return translate_t(t, ty, ctx)
    return translate_t_prime(t, ty, ctx)


def translate_ctx(ctx, fragment: Fragment) -> list:
    f = type_t if fragment is Fragment.ArrowFree else type_t_prime
    return [(x, f(ty)) for x, ty in (ctx or [])]


def check_translation(t: Term, fragment: Fragment, ctx=None) -> bool:
    """Typing preservation for one term: the image has the translated type."""
    ty = check_ini(ctx, t).type
    u, uty = translate(t, fragment, ty, ctx)
    target = check_ni if fragment is Fragment.ArrowFree else check_i
    return target(translate_ctx(ctx, fragment), u, uty).type == uty


# ---------------------------------------------------------------------------
# Semantic preservation and full abstraction
# ---------------------------------------------------------------------------


def denote_source(model: Model, t: Term):
    return eval_ini(model, {}, t)


def denote_target(model: Model, t: Term, fragment: Fragment, ty: Optional[Type] = None):
    u, uty = translate(t, fragment, ty)
    if fragment is Fragment.ArrowFree:
        return eval_ni(model, {}, u)
    return eval_erased(model, {}, u, uty)


def preserves_semantics(model: Model, t: Term, fragment: Fragment) -> bool:
    ty = check_ini(None, t).type
    if contains_arrow(ty):
        raise UnsupportedType("cannot observe a function")
    return model.value_eq(denote_source(model, t), denote_target(model, t, fragment, ty))


@dataclass
class FullAbstractionReport:
    fragment: Fragment
    checked: int = 0
    equal_pairs: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_full_abstraction(model: Model, pairs, fragment: Fragment) -> FullAbstractionReport:
    """Source equality must coincide with equality of the translations."""
    rep = FullAbstractionReport(fragment)
    for t1, t2 in pairs:
        ty1, ty2 = check_ini(None, t1).type, check_ini(None, t2).type
        if ty1 != ty2:
            raise ValueError("pair members have different types")
        if contains_arrow(ty1):
            raise UnsupportedType("cannot observe a function")
        src = model.value_eq(denote_source(model, t1), denote_source(model, t2))
        tgt = model.value_eq(denote_target(model, t1, fragment, ty1),
                             denote_target(model, t2, fragment, ty2))
        rep.checked += 1
        rep.equal_pairs += src
        if src != tgt:
            rep.violations.append((t1, t2, src, tgt))
    return rep
