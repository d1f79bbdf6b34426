"""Type-directed random generation of closed (or open) well-typed terms.

Generation mirrors the typing rules: in the affine judgments a set of still
available variables is threaded through multiplicative nodes exactly as the
checker does, so every emitted term typechecks by construction.  A "loose"
mode forgets consumption and therefore also produces terms that reuse
variables; it feeds the checker-versus-oracle comparison.

Every choice is drawn from one `random.Random(seed)`, so a configuration
always yields the same corpus.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .checker import TypeCheckError, check
from .syntax import (
    App, BOOL, Case, Const, Inj, Lam, Layer, Let, LetTensor, NAME, PairShared,
    PairTensor, PrimOp, Proj, Sample, TBool, TLolli, TModal, TName, TOplus,
    TProd, TSum, TTensor, Term, Type, Var,
)

# relative weights of productions; binders and sample nodes are favoured so
# corpora exercise context splitting and the lax monoidal path
DEFAULT_WEIGHTS = {
    "var": 4,
    "const": 2,
    "prim": 3,
    "intro": 3,
    "let": 4,
    "let_tensor": 3,
    "proj": 2,
    "app": 3,
    "case": 3,
    "op": 2,
    "sample": 5,
}

EFFECT_OF_MODEL = {"dist": "coin", "pset": "amb", "name": "fresh"}


class GenExhausted(Exception):
    """No term of the requested type fits in the depth budget."""


@dataclass(frozen=True)
class GenConfig:
    max_depth: int = 4
    seed: int = 0
    target_type: Optional[Type] = None
    layer: Layer = Layer.INI
    model: str = "dist"
    count: int = 10
    weights: dict = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    fragment: Optional[str] = None  # "ArrowFree" | "Multiplicative" | None (INI only)
    affine: bool = True

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")


# ---------------------------------------------------------------------------
# type utilities
# ---------------------------------------------------------------------------


def min_depth(ty: Type, layer: Layer, model: str = "dist") -> float:
    """Smallest depth of a closed term of type `ty` (inf if none exists)."""
    inf = float("inf")
    match ty:
        case TBool():
            return 1 if layer is not Layer.I else inf
        case TName():
            return 1 if layer is Layer.NI and model == "name" else inf
        case TProd(a, b) | TTensor(a, b):
            return 1 + max(min_depth(a, layer, model), min_depth(b, layer, model))
        case TSum(a, b) | TOplus(a, b):
            return 1 + min(min_depth(a, layer, model), min_depth(b, layer, model))
        case TLolli(_, b):
            return 1 + min_depth(b, layer, model)
        case TModal(a):
            return 1 + min_depth(a, Layer.NI, model)
    return inf


class _Gen:
    def __init__(self, cfg: GenConfig, rng: random.Random):
        self.cfg = cfg
        self.rng = rng
        self.w = cfg.weights
        self.counter = 0
        self.model = cfg.model
        self.reserved: set = set()

    def fresh(self, base: str = "x") -> str:
        while True:
            self.counter += 1
            name = f"{base}{self.counter}"
            if name not in self.reserved:
                return name

    def pick(self, options: list):
        """Weighted choice among (weight-key, thunk) pairs; falls through on failure."""
        opts = [(self.w.get(k, 1), k, f) for k, f in options if self.w.get(k, 1) > 0]
        while opts:
            total = sum(w for w, _, _ in opts)
            r = self.rng.uniform(0, total)
            acc = 0.0
            for i, (w, _, f) in enumerate(opts):
                acc += w
                if r <= acc:
                    break
            _, _, f = opts.pop(i)
            try:
                return f()
            except GenExhausted:
                continue
        raise GenExhausted("no production applies")

    # -- random types ---------------------------------------------------------
    def ini_type(self, budget: int, arrows: bool = True, prods: bool = True) -> Type:
        frag = self.cfg.fragment
        arrows = arrows and frag != "ArrowFree"
        prods = prods and frag != "Multiplicative"
        if budget <= 1 or self.rng.random() < 0.45:
            return BOOL
        ctors = [TTensor]
        if prods:
            ctors.append(TProd)
        if arrows:
            ctors.append(TLolli)
        c = self.rng.choice(ctors)
        return c(self.ini_type(budget - 1, arrows, prods), self.ini_type(budget - 1, arrows, prods))

    def obs_ini_type(self, budget: int) -> Type:
        return self.ini_type(budget, arrows=False)

    def ni_type(self, budget: int) -> Type:
        base = [BOOL, NAME] if self.model == "name" else [BOOL]
        if budget <= 1 or self.rng.random() < 0.5:
            return self.rng.choice(base)
        c = self.rng.choice([TProd, TProd, TSum])
        return c(self.ni_type(budget - 1), self.ni_type(budget - 1))

    def i_type(self, budget: int, arrows: bool = True) -> Type:
        if budget <= 1 or self.rng.random() < 0.45:
            return TModal(self.ni_type(2))
        ctors = [TTensor, TOplus] + ([TLolli] if arrows else [])
        c = self.rng.choice(ctors)
        return c(self.i_type(budget - 1, arrows), self.i_type(budget - 1, arrows))

    def md(self, ty, layer):
        return min_depth(ty, layer, self.model)

    # ======================================================================
    # one-level calculus
    # ======================================================================
    def ini(self, ty: Type, avail: dict, d: int) -> tuple:
        """(term, consumed names).  `avail` maps usable variables to types."""
        if d < 1:
            raise GenExhausted("depth")
        frag = self.cfg.fragment
        opts = []
        vs = [x for x, t in avail.items() if t == ty]
        if vs:
            opts.append(("var", lambda: self._var(vs)))
        if isinstance(ty, TBool):
            opts.append(("const", lambda: (Const(self.rng.random() < 0.5), set())))
            opts.append(("prim", lambda: (PrimOp("coin"), set())))
        if d >= 2:
            opts += self._ini_intro(ty, avail, d)
            opts.append(("let", lambda: self._ini_let(ty, avail, d)))
            opts.append(("let_tensor", lambda: self._ini_let_tensor(ty, avail, d)))
            if frag != "Multiplicative":
                opts.append(("proj", lambda: self._ini_proj(ty, avail, d)))
            if frag != "ArrowFree":
                opts.append(("app", lambda: self._ini_app(ty, avail, d)))
        return self.pick(opts)

    def _var(self, vs):
        x = self.rng.choice(vs)
        return Var(x), {x}

    def _minus(self, avail: dict, used: set) -> dict:
        if not self.cfg.affine:
            return avail
        return {x: t for x, t in avail.items() if x not in used}

    def _ini_intro(self, ty, avail, d):
        match ty:
            case TProd(a, b):
                def f():
                    ta, ca = self.ini(a, avail, d - 1)
                    tb, cb = self.ini(b, avail, d - 1)
                    return PairShared(ta, tb), ca | cb
                return [("intro", f)]
            case TTensor(a, b):
                def f():
                    ta, ca = self.ini(a, avail, d - 1)
                    tb, cb = self.ini(b, self._minus(avail, ca), d - 1)
                    return PairTensor(ta, tb), ca | cb
                return [("intro", f)]
            case TLolli(a, b):
                def f():
                    x = self.fresh()
                    tb, cb = self.ini(b, {**avail, x: a}, d - 1)
                    return Lam(x, a, tb), cb - {x}
                return [("intro", f)]
        return []

    def _ini_let(self, ty, avail, d):
        sigma = self.ini_type(2)
        if self.md(sigma, Layer.INI) > d - 1:
            raise GenExhausted("let")
        ta, ca = self.ini(sigma, avail, d - 1)
        x = self.fresh()
        tb, cb = self.ini(ty, {**self._minus(avail, ca), x: sigma}, d - 1)
        return Let(x, ta, tb), ca | (cb - {x})

    def _ini_let_tensor(self, ty, avail, d):
        sigma = TTensor(self.ini_type(1 + (d > 4)), self.ini_type(1 + (d > 4)))
        if self.md(sigma, Layer.INI) > d - 1:
            raise GenExhausted("let tensor")
        ta, ca = self.ini(sigma, avail, d - 1)
        x, y = self.fresh(), self.fresh()
        tb, cb = self.ini(ty, {**self._minus(avail, ca), x: sigma.left, y: sigma.right}, d - 1)
        return LetTensor(x, y, ta, tb), ca | (cb - {x, y})

    def _ini_proj(self, ty, avail, d):
        other = self.ini_type(1)
        i = self.rng.choice((1, 2))
        pty = TProd(ty, other) if i == 1 else TProd(other, ty)
        if self.md(pty, Layer.INI) > d - 1:
            raise GenExhausted("proj")
        tb, cb = self.ini(pty, avail, d - 1)
        return Proj(i, tb), cb

    def _ini_app(self, ty, avail, d):
        sigma = self.ini_type(2)
        fty = TLolli(sigma, ty)
        if self.md(fty, Layer.INI) > d - 1 or self.md(sigma, Layer.INI) > d - 1:
            raise GenExhausted("app")
        tf, cf = self.ini(fty, avail, d - 1)
        ta, ca = self.ini(sigma, self._minus(avail, cf), d - 1)
        return App(tf, ta), cf | ca

    # ======================================================================
    # sharing layer (contexts are shared, nothing is consumed)
    # ======================================================================
    def ni(self, ty: Type, ctx: dict, d: int) -> Term:
        if d < 1:
            raise GenExhausted("depth")
        eff = EFFECT_OF_MODEL[self.model]
        opts = []
        vs = [x for x, t in ctx.items() if t == ty]
        if vs:
            opts.append(("var", lambda: Var(self.rng.choice(vs))))
        if isinstance(ty, TBool):
            opts.append(("const", lambda: Const(self.rng.random() < 0.5)))
            if eff != "fresh":
                opts.append(("prim", lambda: PrimOp(eff)))
        if isinstance(ty, TName) and eff == "fresh":
            opts.append(("prim", lambda: PrimOp("fresh")))
        if d >= 2:
            match ty:
                case TProd(a, b):
                    opts.append(("intro", lambda: PairShared(self.ni(a, ctx, d - 1), self.ni(b, ctx, d - 1))))
                case TSum(a, b):
                    def inj():
                        i = self.rng.choice((1, 2))
                        return Inj(i, self.ni(a if i == 1 else b, ctx, d - 1), ty)
                    opts.append(("intro", inj))
            if isinstance(ty, TBool):
                opts.append(("op", lambda: self._ni_op(ctx, d)))
            opts.append(("let", lambda: self._ni_let(ty, ctx, d)))
            opts.append(("proj", lambda: self._ni_proj(ty, ctx, d)))
            opts.append(("case", lambda: self._ni_case(ty, ctx, d)))
        return self.pick(opts)

    def _ni_op(self, ctx, d):
        ops = ["not", "and", "or", "xor", "eqb"] + (["eqn"] if self.model == "name" else [])
        op = self.rng.choice(ops)
        if op == "not":
            return PrimOp(op, (self.ni(BOOL, ctx, d - 1),))
        base = NAME if op == "eqn" else BOOL
        return PrimOp(op, (self.ni(TProd(base, base), ctx, d - 1),))

    def _ni_let(self, ty, ctx, d):
        sigma = self.ni_type(2)
        if self.md(sigma, Layer.NI) > d - 1:
            raise GenExhausted("let")
        x = self.fresh()
        return Let(x, self.ni(sigma, ctx, d - 1), self.ni(ty, {**ctx, x: sigma}, d - 1))

    def _ni_proj(self, ty, ctx, d):
        other = self.ni_type(1)
        i = self.rng.choice((1, 2))
        pty = TProd(ty, other) if i == 1 else TProd(other, ty)
        if self.md(pty, Layer.NI) > d - 1:
            raise GenExhausted("proj")
        return Proj(i, self.ni(pty, ctx, d - 1))

    def _ni_case(self, ty, ctx, d):
        sty = BOOL if self.rng.random() < 0.5 else TSum(self.ni_type(1), self.ni_type(1))
        if self.md(sty, Layer.NI) > d - 1:
            raise GenExhausted("case")
        s = self.ni(sty, ctx, d - 1)
        lx, ry = (BOOL, BOOL) if isinstance(sty, TBool) else (sty.left, sty.right)
        x, y = self.fresh(), self.fresh()
        return Case(s, x, self.ni(ty, {**ctx, x: lx}, d - 1), y, self.ni(ty, {**ctx, y: ry}, d - 1))

    # ======================================================================
    # independent layer (affine)
    # ======================================================================
    def i(self, ty: Type, avail: dict, d: int) -> tuple:
        if d < 1:
            raise GenExhausted("depth")
        opts = []
        vs = [x for x, t in avail.items() if t == ty]
        if vs:
            opts.append(("var", lambda: self._var(vs)))
        if d >= 2:
            match ty:
                case TModal(a):
                    opts.append(("sample", lambda: self._i_sample(a, avail, d)))
                case TTensor(a, b):
                    def f():
                        ta, ca = self.i(a, avail, d - 1)
                        tb, cb = self.i(b, self._minus(avail, ca), d - 1)
                        return PairTensor(ta, tb), ca | cb
                    opts.append(("intro", f))
                case TOplus(a, b):
                    def f():
                        k = self.rng.choice((1, 2))
                        tb, cb = self.i(a if k == 1 else b, avail, d - 1)
                        return Inj(k, tb, ty), cb
                    opts.append(("intro", f))
                case TLolli(a, b):
                    def f():
                        x = self.fresh()
                        tb, cb = self.i(b, {**avail, x: a}, d - 1)
                        return Lam(x, a, tb), cb - {x}
                    opts.append(("intro", f))
            opts.append(("let_tensor", lambda: self._i_let_tensor(ty, avail, d)))
            opts.append(("case", lambda: self._i_case(ty, avail, d)))
            opts.append(("app", lambda: self._i_app(ty, avail, d)))
            opts.append(("let", lambda: self._i_let(ty, avail, d)))
        return self.pick(opts)

    def _i_sample(self, inner: Type, avail, d):
        n = self.rng.choice((0, 1, 1, 2, 2, 3))
        binds, used, ctx = [], set(), {}
        for _ in range(n):
            sigma = self.ni_type(2)
            if self.md(TModal(sigma), Layer.I) > d - 1:
                continue
            src, c = self.i(TModal(sigma), self._minus(avail, used), d - 1)
            used |= c
            x = self.fresh()
            binds.append((src, x))
            ctx[x] = sigma
        body = self.ni(inner, ctx, d - 1)
        return Sample(tuple(binds), body), used

    def _i_let_tensor(self, ty, avail, d):
        sigma = TTensor(self.i_type(1), self.i_type(1))
        if self.md(sigma, Layer.I) > d - 1:
            raise GenExhausted("let tensor")
        ta, ca = self.i(sigma, avail, d - 1)
        x, y = self.fresh(), self.fresh()
        tb, cb = self.i(ty, {**self._minus(avail, ca), x: sigma.left, y: sigma.right}, d - 1)
        return LetTensor(x, y, ta, tb), ca | (cb - {x, y})

    def _i_case(self, ty, avail, d):
        sty = TOplus(self.i_type(1), self.i_type(1))
        if self.md(sty, Layer.I) > d - 1:
            raise GenExhausted("case")
        s, cs = self.i(sty, avail, d - 1)
        rest = self._minus(avail, cs)
        x, y = self.fresh(), self.fresh()
        tl, cl = self.i(ty, {**rest, x: sty.left}, d - 1)
        tr, cr = self.i(ty, {**rest, y: sty.right}, d - 1)
        return Case(s, x, tl, y, tr), cs | (cl - {x}) | (cr - {y})

    def _i_app(self, ty, avail, d):
        sigma = self.i_type(1)
        fty = TLolli(sigma, ty)
        if self.md(fty, Layer.I) > d - 1 or self.md(sigma, Layer.I) > d - 1:
            raise GenExhausted("app")
        tf, cf = self.i(fty, avail, d - 1)
        ta, ca = self.i(sigma, self._minus(avail, cf), d - 1)
        return App(tf, ta), cf | ca

    def _i_let(self, ty, avail, d):
        sigma = self.i_type(2)
        if self.md(sigma, Layer.I) > d - 1:
            raise GenExhausted("let")
        ta, ca = self.i(sigma, avail, d - 1)
        x = self.fresh()
        tb, cb = self.i(ty, {**self._minus(avail, ca), x: sigma}, d - 1)
        return Let(x, ta, tb), ca | (cb - {x})

    # -- dispatch ---------------------------------------------------------
    def term(self, layer: Layer, ty: Type, ctx: dict, d: int) -> Term:
        if self.md(ty, layer) > d and not ctx:
            raise GenExhausted(f"no closed term of that type within depth {d}")
        self.reserved |= set(ctx)
        if layer is Layer.INI:
            return self.ini(ty, dict(ctx), d)[0]
        if layer is Layer.NI:
            return self.ni(ty, dict(ctx), d)
        return self.i(ty, dict(ctx), d)[0]

    def random_type(self, layer: Layer) -> Type:
        if layer is Layer.INI:
            return self.ini_type(3)
        if layer is Layer.NI:
            return self.ni_type(3)
        return self.i_type(3)


def gen_term(rng: random.Random, layer: Layer, ty: Type, depth: int, ctx=None,
             model: str = "dist", fragment: Optional[str] = None, affine: bool = True,
             weights: Optional[dict] = None) -> Term:
    """One term of type `ty` under `ctx` (a list of (name, type) pairs)."""
    cfg = GenConfig(max_depth=depth, layer=layer, model=model, fragment=fragment, affine=affine,
                    weights=weights or dict(DEFAULT_WEIGHTS))
    return _Gen(cfg, rng).term(layer, ty, dict(ctx or []), depth)


def generate_terms(cfg: GenConfig) -> list:
    """`cfg.count` closed terms; every one is re-checked before it is returned."""
    rng = random.Random(cfg.seed)
    g = _Gen(cfg, rng)
    out = []
    attempts = 0
    while len(out) < cfg.count:
        attempts += 1
        if attempts > 50 * cfg.count + 100:
            raise GenExhausted(f"only {len(out)} of {cfg.count} terms generated")
        ty = cfg.target_type if cfg.target_type is not None else g.random_type(cfg.layer)
        d = rng.randint(1, cfg.max_depth) if cfg.target_type is None else cfg.max_depth
        try:
            t = g.term(cfg.layer, ty, {}, max(d, 1))
        except GenExhausted:
            if cfg.target_type is not None and g.md(ty, cfg.layer) > cfg.max_depth:
                raise
            continue
        if cfg.affine:
            try:
                got = check(cfg.layer, None, t, None, cfg.model).type
            except TypeCheckError as e:  # pragma: no cover - generator bug
                raise AssertionError(f"generated an ill-typed term: {e}") from e
            assert got == ty, (got, ty)
        out.append(t)
    return out
