"""Abstract syntax shared by the one-level and two-level calculi.

A single `Term` family covers both grammars.  Every node carries an optional
source span and a layer tag (``INI``, ``NI`` or ``I``); neither takes part in
structural equality, so two terms parsed from different places compare equal
when they have the same shape.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, Optional, Union


class Layer(str, Enum):
    INI = "INI"
    NI = "NI"
    I = "I"  # noqa: E741


@dataclass(frozen=True)
class Span:
    start: int
    end: int

    def __str__(self) -> str:
        return f"{self.start}-{self.end}"


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TBool:
    def __str__(self) -> str:
        return "Bool"


@dataclass(frozen=True)
class TName:
    def __str__(self) -> str:
        return "Name"


@dataclass(frozen=True)
class TProd:
    """Sharing product ``*``."""

    left: "Type"
    right: "Type"


@dataclass(frozen=True)
class TTensor:
    """Separating product ``(x)``."""

    left: "Type"
    right: "Type"


@dataclass(frozen=True)
class TSum:
    """Sharing sum ``+`` of the NI layer."""

    left: "Type"
    right: "Type"


@dataclass(frozen=True)
class TOplus:
    """Separating sum ``(+)`` of the I layer."""

    left: "Type"
    right: "Type"


@dataclass(frozen=True)
class TLolli:
    arg: "Type"
    res: "Type"


@dataclass(frozen=True)
class TModal:
    inner: "Type"


Type = Union[TBool, TName, TProd, TTensor, TSum, TOplus, TLolli, TModal]

BOOL = TBool()
NAME = TName()

_BINARY_TYPES = (TProd, TTensor, TSum, TOplus)


def type_children(ty: Type) -> tuple:
    match ty:
        case TProd(a, b) | TTensor(a, b) | TSum(a, b) | TOplus(a, b):
            return (a, b)
        case TLolli(a, b):
            return (a, b)
        case TModal(a):
            return (a,)
    return ()


def contains_arrow(ty: Type) -> bool:
    if isinstance(ty, TLolli):
        return True
    return any(contains_arrow(c) for c in type_children(ty))


def is_ini_type(ty: Type) -> bool:
    match ty:
        case TBool():
            return True
        case TProd(a, b) | TTensor(a, b) | TLolli(a, b):
            return is_ini_type(a) and is_ini_type(b)
    return False


def is_ni_type(ty: Type) -> bool:
    match ty:
        case TBool() | TName():
            return True
        case TProd(a, b) | TSum(a, b):
            return is_ni_type(a) and is_ni_type(b)
    return False


def is_i_type(ty: Type) -> bool:
    match ty:
        case TModal(a):
            return is_ni_type(a)
        case TTensor(a, b) | TOplus(a, b) | TLolli(a, b):
            return is_i_type(a) and is_i_type(b)
    return False


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Node:
    span: Optional[Span] = field(default=None, compare=False, repr=False, kw_only=True)
    layer: Optional[Layer] = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class Const(Node):
    value: bool


@dataclass(frozen=True)
class PrimOp(Node):
    """A primitive: nullary effects (``coin``, ``amb``, ``fresh``) or a pure
    operation applied to one argument (``not t``, ``eqb (t, u)``)."""

    op: str
    args: tuple = ()


@dataclass(frozen=True)
class PairShared(Node):
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Proj(Node):
    index: int
    body: "Term"


@dataclass(frozen=True)
class PairTensor(Node):
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class LetTensor(Node):
    x: str
    y: str
    bound: "Term"
    body: "Term"


@dataclass(frozen=True)
class Inj(Node):
    """``inl``/``inr``; `annot` is the whole sum type when given."""

    index: int
    body: "Term"
    annot: Optional[Type] = None


@dataclass(frozen=True)
class Case(Node):
    scrut: "Term"
    x: str
    left: "Term"
    y: str
    right: "Term"


@dataclass(frozen=True)
class Lam(Node):
    x: str
    annot: Type
    body: "Term"


@dataclass(frozen=True)
class App(Node):
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Let(Node):
    x: str
    bound: "Term"
    body: "Term"


@dataclass(frozen=True)
class Sample(Node):
    bindings: tuple  # of (Term, str)
    body: "Term"

    @property
    def sources(self) -> tuple:
        return tuple(t for t, _ in self.bindings)

    @property
    def names(self) -> tuple:
        return tuple(x for _, x in self.bindings)


Term = Union[Var, Const, PrimOp, PairShared, Proj, PairTensor, LetTensor, Inj,
             Case, Lam, App, Let, Sample]


def coin() -> PrimOp:
    return PrimOp("coin")


TRUE = Const(True)
FALSE = Const(False)


def children(t: Term) -> Iterator[Term]:
    """Immediate subterms, left to right."""
    match t:
        case Var() | Const():
            return iter(())
        case PrimOp(_, args):
            return iter(args)
        case PairShared(a, b) | PairTensor(a, b) | App(a, b):
            return iter((a, b))
        case Proj(_, b) | Inj(_, b):
            return iter((b,))
        case LetTensor(_, _, a, b) | Let(_, a, b):
            return iter((a, b))
        case Case(s, _, a, _, b):
            return iter((s, a, b))
        case Lam(_, _, b):
            return iter((b,))
        case Sample(binds, body):
            return iter([s for s, _ in binds] + [body])
    raise TypeError(f"not a term: {t!r}")


def subterms(t: Term) -> Iterator[Term]:
    yield t
    for c in children(t):
        yield from subterms(c)


def size(t: Term) -> int:
    return sum(1 for _ in subterms(t))


def depth(t: Term) -> int:
    return 1 + max((depth(c) for c in children(t)), default=0)


def free_vars(t: Term) -> frozenset:
    match t:
        case Var(x):
            return frozenset({x})
        case Const():
            return frozenset()
        case LetTensor(x, y, a, b):
            return free_vars(a) | (free_vars(b) - {x, y})
        case Let(x, a, b):
            return free_vars(a) | (free_vars(b) - {x})
        case Case(s, x, a, y, b):
            return free_vars(s) | (free_vars(a) - {x}) | (free_vars(b) - {y})
        case Lam(x, _, b):
            return free_vars(b) - {x}
        case Sample(binds, body):
            out = frozenset().union(*(free_vars(s) for s, _ in binds))
            return out | (free_vars(body) - {x for _, x in binds})
    return frozenset().union(*(free_vars(c) for c in children(t)))


def bound_names(t: Term) -> set:
    out = set()
    for s in subterms(t):
        match s:
            case LetTensor(x, y, _, _) | Case(_, x, _, y, _):
                out |= {x, y}
            case Let(x, _, _) | Lam(x, _, _):
                out.add(x)
            case Sample(binds, _):
                out |= {x for _, x in binds}
    return out


def all_names(t: Term) -> set:
    return bound_names(t) | set(free_vars(t))


def fresh_name(base: str, avoid) -> str:
    """First of ``base``, ``base1``, ``base2``... not in `avoid`."""
    if base not in avoid:
        return base
    for i in itertools.count(1):
        cand = f"{base}{i}"
        if cand not in avoid:
            return cand
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------


def substitute(t: Term, x: str, s: Term) -> Term:
    """Capture-avoiding ``t[s/x]``."""
    return _subst(t, x, s, free_vars(s))


def _rebind(names, body_terms, x, s, fv_s):
    """Rename binders in `names` that would capture a free variable of `s`.

    Returns the (possibly renamed) binder names and the matching bodies.
    """
    avoid = set(fv_s) | {x}
    for b in body_terms:
        avoid |= all_names(b)
    new_names = []
    bodies = list(body_terms)
    for n in names:
        if n in fv_s:
            m = fresh_name(n, avoid | set(new_names) | set(names))
            avoid.add(m)
            bodies = [_subst(b, n, Var(m), frozenset({m})) for b in bodies]
            new_names.append(m)
        else:
            new_names.append(n)
    return new_names, bodies


def _subst(t: Term, x: str, s: Term, fv_s: frozenset) -> Term:
    match t:
        case Var(y):
            return s if y == x else t
        case Const():
            return t
        case PrimOp(_, args):
            return replace(t, args=tuple(_subst(a, x, s, fv_s) for a in args))
        case PairShared(a, b):
            return replace(t, left=_subst(a, x, s, fv_s), right=_subst(b, x, s, fv_s))
        case PairTensor(a, b):
            return replace(t, left=_subst(a, x, s, fv_s), right=_subst(b, x, s, fv_s))
        case App(a, b):
            return replace(t, fn=_subst(a, x, s, fv_s), arg=_subst(b, x, s, fv_s))
        case Proj(_, b):
            return replace(t, body=_subst(b, x, s, fv_s))
        case Inj(_, b, _):
            return replace(t, body=_subst(b, x, s, fv_s))
        case LetTensor(y1, y2, a, b):
            a2 = _subst(a, x, s, fv_s)
            if x in (y1, y2) or x not in free_vars(b):
                return replace(t, bound=a2)
            (y1, y2), (b,) = _rebind((y1, y2), (b,), x, s, fv_s)
            return replace(t, x=y1, y=y2, bound=a2, body=_subst(b, x, s, fv_s))
        case Let(y, a, b):
            a2 = _subst(a, x, s, fv_s)
            if y == x or x not in free_vars(b):
                return replace(t, bound=a2)
            (y,), (b,) = _rebind((y,), (b,), x, s, fv_s)
            return replace(t, x=y, bound=a2, body=_subst(b, x, s, fv_s))
        case Case(sc, y1, a, y2, b):
            sc2 = _subst(sc, x, s, fv_s)
            if y1 != x and x in free_vars(a):
                (y1,), (a,) = _rebind((y1,), (a,), x, s, fv_s)
                a = _subst(a, x, s, fv_s)
            if y2 != x and x in free_vars(b):
                (y2,), (b,) = _rebind((y2,), (b,), x, s, fv_s)
                b = _subst(b, x, s, fv_s)
            return replace(t, scrut=sc2, x=y1, left=a, y=y2, right=b)
        case Lam(y, _, b):
            if y == x or x not in free_vars(b):
                return t
            (y,), (b,) = _rebind((y,), (b,), x, s, fv_s)
            return replace(t, x=y, body=_subst(b, x, s, fv_s))
        case Sample(binds, body):
            srcs = tuple(_subst(src, x, s, fv_s) for src, _ in binds)
            names = [n for _, n in binds]
            if x not in names and x in free_vars(body):
                names, (body,) = _rebind(names, (body,), x, s, fv_s)
                body = _subst(body, x, s, fv_s)
            return replace(t, bindings=tuple(zip(srcs, names)), body=body)
    raise TypeError(f"not a term: {t!r}")


def rename_free(t: Term, mapping: dict) -> Term:
    """Rename free variables simultaneously (targets must not be captured)."""
    out = t
    tmp = {}
    avoid = all_names(t) | set(mapping.values())
    for old in mapping:
        tmp[old] = fresh_name("_r", avoid)
        avoid.add(tmp[old])
        out = substitute(out, old, Var(tmp[old]))
    for old, new in mapping.items():
        out = substitute(out, tmp[old], Var(new))
    return out


# ---------------------------------------------------------------------------
# Alpha equivalence (via de Bruijn-style environments)
# ---------------------------------------------------------------------------


def alpha_eq(t: Term, u: Term) -> bool:
    return _aeq(t, u, {}, {}, 0)


def _aeq(t, u, env_t: dict, env_u: dict, lvl: int) -> bool:
    if type(t) is not type(u):
        return False
    match t:
        case Var(x):
            bx, by = env_t.get(x), env_u.get(u.name)
            if bx is None and by is None:
                return x == u.name
            return bx == by
        case Const(b):
            return b == u.value
        case PrimOp(op, args):
            return (op == u.op and len(args) == len(u.args)
                    and all(_aeq(a, b, env_t, env_u, lvl) for a, b in zip(args, u.args)))
        case Proj(i, b):
            return i == u.index and _aeq(b, u.body, env_t, env_u, lvl)
        case Inj(i, b, ann):
            return i == u.index and ann == u.annot and _aeq(b, u.body, env_t, env_u, lvl)
        case PairShared() | PairTensor() | App():
            return all(_aeq(a, b, env_t, env_u, lvl) for a, b in zip(children(t), children(u)))
        case LetTensor(x, y, a, b):
            if not _aeq(a, u.bound, env_t, env_u, lvl):
                return False
            et = {**env_t, x: lvl, y: lvl + 1}
            eu = {**env_u, u.x: lvl, u.y: lvl + 1}
            if x == y:
                et[x] = lvl + 1
            if u.x == u.y:
                eu[u.x] = lvl + 1
            return _aeq(b, u.body, et, eu, lvl + 2)
        case Let(x, a, b):
            return (_aeq(a, u.bound, env_t, env_u, lvl)
                    and _aeq(b, u.body, {**env_t, x: lvl}, {**env_u, u.x: lvl}, lvl + 1))
        case Case(s, x, a, y, b):
            return (_aeq(s, u.scrut, env_t, env_u, lvl)
                    and _aeq(a, u.left, {**env_t, x: lvl}, {**env_u, u.x: lvl}, lvl + 1)
                    and _aeq(b, u.right, {**env_t, y: lvl}, {**env_u, u.y: lvl}, lvl + 1))
        case Lam(x, ann, b):
            return ann == u.annot and _aeq(b, u.body, {**env_t, x: lvl}, {**env_u, u.x: lvl}, lvl + 1)
        case Sample(binds, body):
            if len(binds) != len(u.bindings):
                return False
            if not all(_aeq(s1, s2, env_t, env_u, lvl) for (s1, _), (s2, _) in zip(binds, u.bindings)):
                return False
            # the body sees only the sample-bound names
            et = {x: lvl + i for i, (_, x) in enumerate(binds)}
            eu = {x: lvl + i for i, (_, x) in enumerate(u.bindings)}
            return _aeq(body, u.body, {**env_t, **et}, {**env_u, **eu}, lvl + len(binds))
    raise TypeError(f"not a term: {t!r}")


def with_layer(t: Term, layer: Layer) -> Term:
    """Retag a whole tree with one layer (sample bodies get NI)."""
    match t:
        case Sample(binds, body):
            return replace(t, layer=layer,
                           bindings=tuple((with_layer(s, layer), x) for s, x in binds),
                           body=with_layer(body, Layer.NI))
    kids = list(children(t))
    if not kids:
        return replace(t, layer=layer)
    new = [with_layer(c, layer) for c in kids]
    return _rebuild(t, new, layer)


def _rebuild(t: Term, kids: list, layer) -> Term:
    match t:
        case PrimOp():
            return replace(t, args=tuple(kids), layer=layer)
        case PairShared() | PairTensor():
            return replace(t, left=kids[0], right=kids[1], layer=layer)
        case App():
            return replace(t, fn=kids[0], arg=kids[1], layer=layer)
        case Proj() | Inj() | Lam():
            return replace(t, body=kids[0], layer=layer)
        case LetTensor() | Let():
            return replace(t, bound=kids[0], body=kids[1], layer=layer)
        case Case():
            return replace(t, scrut=kids[0], left=kids[1], right=kids[2], layer=layer)
    raise TypeError(f"cannot rebuild {t!r}")


def strip_spans(t: Term) -> Term:
    """Drop spans and layer tags (useful for repr-level comparisons)."""
    match t:
        case Sample(binds, body):
            return Sample(tuple((strip_spans(s), x) for s, x in binds), strip_spans(body))
    kids = list(children(t))
    if not kids:
        return replace(t, span=None, layer=None)
    return replace(_rebuild(t, [strip_spans(c) for c in kids], None), span=None)


# ---------------------------------------------------------------------------
# Usage contexts
# ---------------------------------------------------------------------------


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class Entry:
    name: str
    type: Type
    consumed_at: Optional[Span] = None
    consumed: bool = False


@dataclass(frozen=True)
class UsageContext:
    """Ordered typing context with per-variable consumption state.

    Later entries shadow earlier ones with the same name; `extend` refuses
    duplicates among the *visible* entries only through shadowing.
    """

    entries: tuple = ()

    @classmethod
    def of(cls, *pairs) -> "UsageContext":
        names = [n for n, _ in pairs]
        if len(set(names)) != len(names):
            raise UsageError(f"duplicate variables in context: {names}")
        return cls(tuple(Entry(n, ty) for n, ty in pairs))

    def extend(self, name: str, ty: Type) -> "UsageContext":
        return UsageContext(self.entries + (Entry(name, ty),))

    def lookup(self, name: str) -> Optional[tuple]:
        for i in range(len(self.entries) - 1, -1, -1):
            if self.entries[i].name == name:
                return i, self.entries[i]
        return None

    def consume(self, index: int, span: Optional[Span]) -> "UsageContext":
        e = self.entries[index]
        if e.consumed:
            raise UsageError(f"{e.name} already consumed")
        new = replace(e, consumed=True, consumed_at=span)
        return UsageContext(self.entries[:index] + (new,) + self.entries[index + 1:])

    def truncate(self, n: int) -> "UsageContext":
        return UsageContext(self.entries[:n])

    def merge(self, other: "UsageContext") -> "UsageContext":
        """Pointwise union of consumption (for additive premises)."""
        out = []
        for a, b in zip(self.entries, other.entries):
            out.append(a if a.consumed or not b.consumed else b)
        return UsageContext(tuple(out))

    def consumed_names(self) -> set:
        return {e.name for e in self.entries if e.consumed}

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)
