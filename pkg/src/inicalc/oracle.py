"""Exact independence checks for joint computations over pairs.

A joint value factorizes when it equals the product of its marginals:
pointwise weights for distributions, the Cartesian product for sets, and
for names disjoint name supports plus agreement with the recombined halves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

from .checker import check_i, check_ini
from .evaluator import UnsupportedType, eval_erased, eval_i, eval_ini
from .models import Dist, DistModel, Model, NameModel, NameVal, PSet, PSetModel, show_rat, to_json
from .syntax import TModal, TTensor, Term, contains_arrow
from .values import MonV, PairV, names_in


class NotAPairSupport(Exception):
    pass


@dataclass
class FactorizationReport:
    model: str
    is_product: bool
    marginal1: Any
    marginal2: Any
    witness: Optional[tuple] = None  # (pair, joint weight, product weight)
    joint: Any = None
    disjoint: Optional[bool] = None  # name model only
    recombines: Optional[bool] = None  # name model only
    notes: dict = field(default_factory=dict)


def _pairs(support) -> list:
    out = []
    for v in support:
        if not isinstance(v, PairV):
            raise NotAPairSupport(f"support element {v} is not a pair")
        out.append(v)
    return out


def marginals(model: Model, joint) -> tuple:
    if isinstance(model, DistModel):
        ps = _pairs(joint.support())
        m1 = Dist((p.left, w) for p, w in joint.items)
        m2 = Dist((p.right, w) for p, w in joint.items)
        return m1, m2
    if isinstance(model, PSetModel):
        ps = _pairs(joint.elems)
        return PSet(p.left for p in ps), PSet(p.right for p in ps)
    if isinstance(model, NameModel):
        nv = model.observe(joint)
        (p,) = _pairs([nv.payload])
        left = NameVal(nv.count, p.left).canonical()
        right = NameVal(nv.count, p.right).canonical()
        return model.lift(left), model.lift(right)
    raise ValueError(f"unsupported model {model!r}")


def check_factorization(model: Model, joint) -> FactorizationReport:
    m1, m2 = marginals(model, joint)
    if isinstance(model, DistModel):
        mismatches = []
        weights = joint.as_dict()
        for a, pa in m1.items:
            for b, pb in m2.items:
                jw = weights.get(PairV(a, b), Fraction(0))
                if jw != pa * pb:
                    mismatches.append((PairV(a, b), jw, pa * pb))
        # an off-support pair is the clearest evidence of correlation
        off = [w for w in mismatches if w[1] == 0]
        witness = (off or mismatches or [None])[0]
        return FactorizationReport("dist", not mismatches, m1, m2, witness, joint)
    if isinstance(model, PSetModel):
        witness = None
        for a in m1:
            for b in m2:
                if PairV(a, b) not in joint:
                    witness = (PairV(a, b), False, True)
                    break
            if witness:
                break
        ok = witness is None and len(joint) == len(m1) * len(m2)
        return FactorizationReport("pset", ok, m1, m2, witness, joint)
    if isinstance(model, NameModel):
        nv = model.observe(joint)
        p = nv.payload
        overlap = set(names_in(p.left)) & set(names_in(p.right))
        recombines = model.value_eq(model.pair_product(m1, m2), joint)
        witness = None if not overlap else ("shared names", sorted(overlap))
        return FactorizationReport("name", not overlap and recombines, m1, m2, witness, joint,
                                   disjoint=not overlap, recombines=recombines)
    raise ValueError(f"unsupported model {model!r}")


def _require_tensor(ty, modal: bool):
    if not isinstance(ty, TTensor):
        from .parser import show_type
        raise UnsupportedType(f"not a tensor type: {show_type(ty)}")
    if modal and not (isinstance(ty.left, TModal) and isinstance(ty.right, TModal)):
        raise UnsupportedType("expected M t1 (x) M t2")
    if contains_arrow(ty):
        raise UnsupportedType("tensor components contain an arrow")


def check_tensor_soundness_ini(model: Model, t: Term) -> FactorizationReport:
    """Evaluate a closed one-level term of tensor type and test independence."""
    ty = check_ini(None, t, None, model.id).type
    _require_tensor(ty, modal=False)
    return check_factorization(model, eval_ini(model, {}, t))


def check_tensor_soundness_i(model: Model, t: Term) -> FactorizationReport:
    """Compare the erased joint of a closed `M t1 (x) M t2` term with the
    product of its two separately computed components."""
    ty = check_i(None, t, None, model.id).type
    _require_tensor(ty, modal=True)
    v = eval_i(model, {}, t)
    if not (isinstance(v, PairV) and isinstance(v.left, MonV) and isinstance(v.right, MonV)):
        raise AssertionError(f"tensor of boxes evaluated to {v}")
    mu1, mu2 = v.left.comp, v.right.comp
    joint = eval_erased(model, {}, t, ty)
    product = model.pair_product(mu1, mu2)
    same = model.value_eq(joint, product)
    rep = check_factorization(model, joint)
    witness = rep.witness
    if not same and witness is None:
        witness = ("erased joint differs from product", None, None)
    return FactorizationReport(model.id, same and rep.is_product, mu1, mu2, witness, joint,
                               rep.disjoint, rep.recombines, {"erased_equals_product": same})


def report_to_json(model: Model, rep: FactorizationReport) -> dict:
    out = {
        "model": rep.model,
        "isProduct": rep.is_product,
        "marginal1": to_json(model, rep.marginal1),
        "marginal2": to_json(model, rep.marginal2),
    }
    if rep.joint is not None:
        out["joint"] = to_json(model, rep.joint)
    if rep.witness is not None:
        a, b, c = (list(rep.witness) + [None, None])[:3]
        if isinstance(b, Fraction):
            out["witness"] = {"pair": str(a), "joint": show_rat(b), "product": show_rat(c)}
        elif isinstance(a, PairV):
            out["witness"] = {"pair": str(a), "inJoint": b, "inProduct": c}
        else:
            out["witness"] = {"reason": a, "detail": b}
    if rep.disjoint is not None:
        out["disjointNames"] = rep.disjoint
        out["recombines"] = rep.recombines
    if rep.notes:
        out["notes"] = rep.notes
    return out
