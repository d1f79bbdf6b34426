"""A short walk through the library: typing, exact evaluation, the oracle,
the two-level calculus and the translations.

Run with ``python3 demos/tour.py``.
"""

from inicalc.checker import TypeCheckError, check_i, check_ini
from inicalc.evaluator import eval_erased, eval_ini
from inicalc.models import get_model
from inicalc.oracle import check_factorization, check_tensor_soundness_ini
from inicalc.parser import parse_term, parse_type, pretty, show_type
from inicalc.syntax import Layer, TModal
from inicalc.translate import Fragment, denote_target, translate

dist = get_model("dist")


def show(title):
    print(f"\n== {title}")


show("a fair coin")
print(eval_ini(dist, {}, parse_term("coin")))

show("sharing a coin: the pair is perfectly correlated")
corr = eval_ini(dist, {}, parse_term("let x = coin in (x, x)"))
rep = check_factorization(dist, corr)
print(corr)
pair, joint, product = rep.witness
print("product of marginals?", rep.is_product, f"| at {pair}: joint {joint}, product {product}")

show("two coins under (x) are independent, by typing alone")
t = parse_term("coin (x) coin")
print(show_type(check_ini(None, t).type), "-> factorizes:", check_tensor_soundness_ini(dist, t).is_product)

show("the checker refuses to let one variable feed both sides of (x)")
try:
    check_ini(None, parse_term("let x = coin in (fn y: Bool => x (x) y) x"))
except TypeCheckError as e:
    print(e)

show("two-level: sampling one box into a correlated pair stays inside M")
ctx = [("dist", TModal(parse_type("Bool")))]
u = parse_term("sample dist as x in (if x then (true, true) else (false, false))", Layer.I)
print(show_type(check_i(ctx, u).type))

show("two-level: separate boxes are independent in every model")
for mid, prim in (("dist", "coin"), ("pset", "amb"), ("name", "fresh")):
    boxes = parse_term(f"(sample as in {prim}) (x) (sample as in {prim})", Layer.I)
    ty = check_i(None, boxes).type
    print(f"{mid:5}", eval_erased(get_model(mid), {}, boxes, ty))

show("translations agree with the source semantics")
for frag, text in ((Fragment.ArrowFree, "let x = coin in (x, (x, coin))"),
                   (Fragment.Multiplicative, "(fn a: Bool => a (x) coin) true")):
    src = parse_term(text)
    image, ity = translate(src, frag)
    print(f"{frag.value}: {pretty(src)}")
    print(f"  image:  {pretty(image)} : {show_type(ity)}")
    print(f"  source: {eval_ini(dist, {}, src)}")
    print(f"  target: {denote_target(dist, src, frag)}")
