"""Semantic values shared by the evaluators and the effect models."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Union


class IncomparableValue(Exception):
    """Raised when a closure (or boxed computation) must be ordered or compared."""


@dataclass(frozen=True)
class BoolV:
    value: bool

    def __str__(self) -> str:
        return "tt" if self.value else "ff"


@dataclass(frozen=True)
class NameV:
    index: int

    def __str__(self) -> str:
        return f"n{self.index}"


@dataclass(frozen=True)
class PairV:
    left: "Value"
    right: "Value"

    def __str__(self) -> str:
        return f"({self.left},{self.right})"


@dataclass(frozen=True)
class TagV:
    index: int
    value: "Value"

    def __str__(self) -> str:
        return f"{'inl' if self.index == 1 else 'inr'} {self.value}"


@dataclass(frozen=True)
class ClosV:
    env: tuple  # sorted (name, value) pairs
    param: str
    body: Any  # Term
    layer: Any

    def __str__(self) -> str:
        return f"<fn {self.param}>"


@dataclass(frozen=True, eq=False)
class MonV:
    """A boxed computation; equality is decided by the model, not here."""

    comp: Any

    def __str__(self) -> str:
        return f"<{self.comp}>"


Value = Union[BoolV, NameV, PairV, TagV, ClosV, MonV]

TT = BoolV(True)
FF = BoolV(False)


def sort_key(v: Value) -> tuple:
    """Total order on first-order values: constructor tag, then contents.

    Booleans order ``tt`` before ``ff``.
    """
    match v:
        case BoolV(b):
            return (0, 0 if b else 1)
        case NameV(i):
            return (1, i)
        case PairV(a, b):
            return (2, sort_key(a), sort_key(b))
        case TagV(i, a):
            return (3, i, sort_key(a))
    raise IncomparableValue(f"cannot order {v}")


def is_first_order(v: Value) -> bool:
    match v:
        case BoolV() | NameV():
            return True
        case PairV(a, b):
            return is_first_order(a) and is_first_order(b)
        case TagV(_, a):
            return is_first_order(a)
    return False


def names_in(v: Value) -> list:
    """Name indices in left-to-right first-use order (no repeats)."""
    out: list = []
    seen = set()

    def walk(w):
        match w:
            case NameV(i):
                if i not in seen:
                    seen.add(i)
                    out.append(i)
            case PairV(a, b):
                walk(a)
                walk(b)
            case TagV(_, a):
                walk(a)
            case ClosV() | MonV():
                raise IncomparableValue(f"cannot inspect names of {w}")

    walk(v)
    return out


def rename_names(v: Value, f) -> Value:
    match v:
        case NameV(i):
            return NameV(f(i))
        case PairV(a, b):
            return PairV(rename_names(a, f), rename_names(b, f))
        case TagV(i, a):
            return TagV(i, rename_names(a, f))
    return v


def tuple_value(vs) -> Value:
    """Left-nested pairs ``((v1, v2), v3)...`` for n >= 1."""
    vs = list(vs)
    out = vs[0]
    for w in vs[1:]:
        out = PairV(out, w)
    return out


def untuple_value(v: Value, n: int) -> list:
    out = []
    for _ in range(n - 1):
        out.append(v.right)
        v = v.left
    out.append(v)
    return out[::-1]


def render(v: Value) -> str:
    return str(v)
