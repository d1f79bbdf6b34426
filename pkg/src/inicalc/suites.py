"""Batch suites: the equational theory, tensor soundness, and the translations.

Every suite is a pure function of its arguments.  Each item draws from its
own `random.Random` seeded by the suite seed and the item index, so reports
are byte-identical across runs and do not depend on evaluation order.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .checker import TypeCheckError
from .declarative import agree
from .evaluator import eval_ini
from .generate import DEFAULT_WEIGHTS, GenConfig, GenExhausted, _Gen
from .laws import SCHEMAS, check_law
from .models import MODEL_IDS, get_model, render
from .oracle import check_factorization, check_tensor_soundness_i, check_tensor_soundness_ini
from .parser import parse_term, pretty, show_type
from .syntax import (
    App, Const, Lam, Layer, Let, LetTensor, PairTensor, PrimOp, Sample, TModal, TTensor,
    Term, Type, Var, _rebuild, bound_names, children,
)
from .translate import (
    Fragment, NotInFragment, check_full_abstraction, check_translation, classify_fragment,
    preserves_semantics,
)


@dataclass
class SuiteReport:
    kind: str
    seed: int
    rows: list = field(default_factory=list)  # one dict per group
    failures: list = field(default_factory=list)  # one dict per failing item

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"suite": self.kind, "seed": self.seed, "ok": self.ok,
                "groups": self.rows, "failures": self.failures}

    def to_text(self) -> str:
        lines = [f"suite {self.kind} (seed {self.seed})"]
        for r in self.rows:
            status = "PASS" if r["failures"] == 0 else "FAIL"
            extra = "".join(f" {k}={v}" for k, v in r.items()
                            if k not in ("group", "checked", "failures"))
            lines.append(f"  {status} {r['group']}: {r['checked'] - r['failures']}/{r['checked']}{extra}")
        for f in self.failures[:20]:
            lines.append(f"  failure: {f}")
        lines.append("ok" if self.ok else f"{len(self.failures)} failure(s)")
        return "\n".join(lines)


def _rng(seed: int, *tags) -> random.Random:
    return random.Random(":".join(str(t) for t in (seed,) + tags))


# ---------------------------------------------------------------------------
# equations
# ---------------------------------------------------------------------------


def equations_suite(seed: int = 0, count: int = 50, depth: int = 4,
                    models=MODEL_IDS, schemas=SCHEMAS) -> SuiteReport:
    rep = SuiteReport("equations", seed)
    for m in models:
        for s in schemas:
            r = check_law(s, m, count, seed, depth)
            rep.rows.append({"group": f"{s.name} [{m}]", "checked": r.checked,
                             "failures": len(r.failures)})
            for f in r.failures:
                rep.failures.append({"schema": s.name, "model": m, "index": f.index,
                                     "lhs": f.lhs, "rhs": f.rhs, "reason": f.reason})
    return rep


# ---------------------------------------------------------------------------
# soundness
# ---------------------------------------------------------------------------

# the correlated pair: `x` is shared across a product, never across a tensor
NEGATIVE_CONTROL = "let x = coin in (x, x)"


def _draw_closed(g: _Gen, rng: random.Random, layer: Layer, ty: Type, depth: int) -> Term:
    lo = int(g.md(ty, layer))
    if lo > depth:
        raise GenExhausted(f"no closed term of type {show_type(ty)} within depth {depth}")
    return g.term(layer, ty, {}, rng.randint(lo, depth))


def _tensor_item(seed, i, layer, model, depth, weights):
    for attempt in range(100):
        rng = _rng(seed, "soundness", layer.value, model, i, attempt)
        g = _Gen(GenConfig(max_depth=depth, layer=layer, model=model, weights=weights), rng)
        if layer is Layer.INI:
            ty = TTensor(g.ini_type(2, arrows=False), g.ini_type(2, arrows=False))
        else:
            ty = TTensor(TModal(g.ni_type(2)), TModal(g.ni_type(2)))
        try:
            return _draw_closed(g, rng, layer, ty, depth), ty
        except GenExhausted:
            continue
    raise GenExhausted(f"item {i}: no term generated")


def soundness_terms(layer: Layer, model: str, count: int, seed: int = 0, depth: int = 6,
                    weights: Optional[dict] = None) -> list:
    """`count` closed (term, type) pairs at tensor types of observable components."""
    w = weights or dict(DEFAULT_WEIGHTS)
    return [_tensor_item(seed, i, layer, model, depth, w) for i in range(count)]


def soundness_suite(seed: int = 0, count: int = 500, depth: int = 6, models=("dist",),
                    i_count: Optional[int] = None, negative_control: bool = True) -> SuiteReport:
    """One-level terms at `t1 (x) t2` (dist) and two-level terms at
    `M t1 (x) M t2` (each model) must all factorize exactly."""
    rep = SuiteReport("soundness", seed)
    dist = get_model("dist")
    if "dist" in models:
        fails = 0
        for i, (t, ty) in enumerate(soundness_terms(Layer.INI, "dist", count, seed, depth)):
            r = check_tensor_soundness_ini(dist, t)
            if not r.is_product:
                fails += 1
                rep.failures.append({"layer": "INI", "model": "dist", "index": i,
                                     "term": pretty(t), "joint": render(dist, r.joint)})
        rep.rows.append({"group": "INI tensor [dist]", "checked": count, "failures": fails})
    n = count if i_count is None else i_count
    for m in models:
        model = get_model(m)
        fails = disjoint = 0
        for i, (t, ty) in enumerate(soundness_terms(Layer.I, m, n, seed, depth)):
            r = check_tensor_soundness_i(model, t)
            disjoint += bool(r.disjoint)
            if not r.is_product:
                fails += 1
                rep.failures.append({"layer": "I", "model": m, "index": i, "term": pretty(t),
                                     "joint": render(model, r.joint)})
        row = {"group": f"I erasure [{m}]", "checked": n, "failures": fails}
        if m == "name":
            row["disjoint"] = disjoint
        rep.rows.append(row)
    if negative_control:
        # the oracle must flag a correlated joint, or the zero above is vacuous
        t = parse_term(NEGATIVE_CONTROL)
        r = check_factorization(dist, eval_ini(dist, {}, t))
        rep.rows.append({"group": "negative control (flagged)", "checked": 1,
                         "failures": 0 if not r.is_product else 1})
        if r.is_product:
            rep.failures.append({"layer": "INI", "model": "dist", "term": NEGATIVE_CONTROL,
                                 "reason": "oracle did not flag the correlated pair"})
    return rep


# ---------------------------------------------------------------------------
# translations and full abstraction
# ---------------------------------------------------------------------------

_FRAG_NAME = {Fragment.ArrowFree: "ArrowFree", Fragment.Multiplicative: "Multiplicative"}


def _gen_fragment(rng, frag: Fragment, depth: int, ty: Optional[Type] = None,
                  ctx: Optional[dict] = None) -> tuple:
    cfg = GenConfig(max_depth=depth, fragment=_FRAG_NAME[frag])
    g = _Gen(cfg, rng)
    for _ in range(100):
        want = ty if ty is not None else g.ini_type(3, arrows=False)
        try:
            if ctx:
                t = g.term(Layer.INI, want, dict(ctx), rng.randint(1, depth))
            else:
                t = _draw_closed(g, rng, Layer.INI, want, depth)
        except GenExhausted:
            continue
        if frag in classify_fragment(t, want):
            return t, want
    raise GenExhausted(f"no {frag.value} term generated")


def fragment_terms(frag: Fragment, count: int, seed: int = 0, depth: int = 5) -> list:
    return [_gen_fragment(_rng(seed, "fragment", frag.value, i), frag, depth)[0]
            for i in range(count)]


def _positions(t: Term, pred) -> list:
    out = []

    def walk(u, path):
        if pred(u):
            out.append(path)
        if isinstance(u, Sample):
            return
        for k, c in enumerate(children(u)):
            walk(c, path + (k,))

    walk(t, ())
    return out


def _replace_at(t: Term, path: tuple, new: Term) -> Term:
    if not path:
        return new
    kids = list(children(t))
    kids[path[0]] = _replace_at(kids[path[0]], path[1:], new)
    return _rebuild(t, kids, t.layer)


def _perturb(rng, t: Term) -> Optional[Term]:
    """Change the weight of one coin: it becomes a constant."""
    sites = _positions(t, lambda u: isinstance(u, PrimOp) and u.op == "coin")
    if not sites:
        return None
    return _replace_at(t, rng.choice(sites), Const(rng.random() < 0.5))


def _pair(rng, kind: str, frag: Fragment, depth: int) -> tuple:
    """One (t1, t2) pair of closed terms of the same observable type.

    Rewrites only use equations that are sound for effectful subterms:
    substitution is avoided because `*` lets a variable occur twice.
    """
    t, ty = _gen_fragment(rng, frag, depth)
    sub = max(depth - 1, 1)
    if kind == "reflexive":
        return t, t
    if kind == "rewrite":
        a, aty = _gen_fragment(rng, frag, sub)
        if frag is Fragment.Multiplicative and rng.random() < 0.5:
            body, _ = _gen_fragment(rng, frag, sub, ty, {"v": aty})
            return App(Lam("v", aty, body), a), Let("v", a, body)
        b, bty = _gen_fragment(rng, frag, sub)
        body, _ = _gen_fragment(rng, frag, sub, ty, {"v": aty, "w": bty})
        return LetTensor("v", "w", PairTensor(a, b), body), Let("v", a, Let("w", b, body))
    if kind == "let-rewrite":
        if rng.random() < 0.5:
            return Let("v", t, Var("v")), t
        a, aty = _gen_fragment(rng, frag, sub)
        b, bty = _gen_fragment(rng, frag, sub, None, {"v": aty})
        c, _ = _gen_fragment(rng, frag, sub, ty, {"w": bty})
        return Let("w", Let("v", a, b), c), Let("v", a, Let("w", b, c))
    if kind == "perturbed":
        u = _perturb(rng, t)
        if u is not None:
            return t, u
        return t, Let("v", PrimOp("coin"), t)
    t2, _ = _gen_fragment(rng, frag, depth, ty)
    return t, t2


PAIR_KINDS = ("reflexive", "rewrite", "let-rewrite", "perturbed", "random")


def abstraction_pairs(frag: Fragment, count: int, seed: int = 0, depth: int = 4) -> list:
    """`(kind, t1, t2)` triples cycling through the pair kinds."""
    out = []
    for i in range(count):
        kind = PAIR_KINDS[i % len(PAIR_KINDS)]
        t1, t2 = _pair(_rng(seed, "pairs", frag.value, i), kind, frag, depth)
        out.append((kind, t1, t2))
    return out


def fullabstraction_suite(seed: int = 0, count: int = 200, depth: int = 5,
                          pair_count: Optional[int] = None) -> SuiteReport:
    """Typing and semantic preservation on `count` terms per fragment, then
    the full-abstraction biconditional on `pair_count` pairs per fragment."""
    rep = SuiteReport("fullabstraction", seed)
    dist = get_model("dist")
    pc = count // 2 if pair_count is None else pair_count
    for frag in (Fragment.ArrowFree, Fragment.Multiplicative):
        typing = sem = 0
        terms = fragment_terms(frag, count, seed, depth)
        for i, t in enumerate(terms):
            try:
                ok_t = check_translation(t, frag)
            except (TypeCheckError, NotInFragment):
                ok_t = False
            ok_s = preserves_semantics(dist, t, frag)
            typing += ok_t
            sem += ok_s
            if not (ok_t and ok_s):
                rep.failures.append({"fragment": frag.value, "index": i, "term": pretty(t),
                                     "typing": ok_t, "semantics": ok_s})
        rep.rows.append({"group": f"{frag.value} typing", "checked": count, "failures": count - typing})
        rep.rows.append({"group": f"{frag.value} semantics", "checked": count, "failures": count - sem})
        pairs = abstraction_pairs(frag, pc, seed, min(depth, 4))
        fa = check_full_abstraction(dist, [(a, b) for _, a, b in pairs], frag)
        unequal = fa.checked - fa.equal_pairs
        rep.rows.append({"group": f"{frag.value} full abstraction", "checked": fa.checked,
                         "failures": len(fa.violations), "equal": fa.equal_pairs, "unequal": unequal})
        for t1, t2, src, tgt in fa.violations:
            rep.failures.append({"fragment": frag.value, "pair": [pretty(t1), pretty(t2)],
                                 "sourceEqual": src, "targetEqual": tgt})
    return rep


# ---------------------------------------------------------------------------
# algorithmic versus declarative splitting
# ---------------------------------------------------------------------------


def splitting_corpus(count: int, seed: int = 0, depth: int = 4, max_free: int = 4) -> list:
    """`(layer, ctx, term)` triples with at most `max_free` context variables.

    Half the terms come from loose generation, which may reuse a variable,
    and a third have one variable occurrence swapped for another name, so
    both verdicts (accept and reject) are well represented.
    """
    out = []
    layers = (Layer.INI, Layer.NI, Layer.I)
    for i in range(count):
        for attempt in range(100):
            rng = _rng(seed, "split", i, attempt)
            layer = layers[i % 3]
            model = rng.choice(MODEL_IDS) if layer is not Layer.INI else "dist"
            cfg = GenConfig(max_depth=depth, layer=layer, model=model, affine=rng.random() < 0.5)
            g = _Gen(cfg, rng)
            ctx = {f"v{k}": g.random_type(layer) for k in range(rng.randint(0, max_free))}
            try:
                t = g.term(layer, g.random_type(layer), ctx, rng.randint(1, depth))
            except GenExhausted:
                continue
            if rng.random() < 1 / 3:
                t = _swap_var(rng, t, sorted(set(ctx) | bound_names(t)))
            out.append((layer, model, list(ctx.items()), t))
            break
    return out


def _swap_var(rng, t: Term, names: list) -> Term:
    sites = _positions(t, lambda u: isinstance(u, Var))
    if not sites or not names:
        return t
    return _replace_at(t, rng.choice(sites), Var(rng.choice(names)))


def splitting_suite(seed: int = 0, count: int = 300, depth: int = 4) -> SuiteReport:
    rep = SuiteReport("splitting", seed)
    accepted = 0
    for i, (layer, model, ctx, t) in enumerate(splitting_corpus(count, seed, depth)):
        alg, dec = agree(layer, ctx, t, model)
        accepted += alg is not None
        if alg != dec:
            rep.failures.append({"index": i, "layer": layer.value, "term": pretty(t),
                                 "algorithmic": alg and show_type(alg),
                                 "declarative": dec and show_type(dec)})
    rep.rows.append({"group": "algorithmic = declarative", "checked": count,
                     "failures": len(rep.failures), "accepted": accepted})
    return rep


SUITES = {"equations": equations_suite, "soundness": soundness_suite,
          "fullabstraction": fullabstraction_suite}
