import pytest

from inicalc.checker import ErrorKind, TypeCheckError, accepts, check, check_file, check_i, check_ini, check_ni
from inicalc.parser import parse, parse_term, parse_type, show_type
from inicalc.syntax import BOOL, Layer, TModal, TProd, TTensor

# the four motivating programs
SHARED_APP = "let x = coin in (fn y: Bool => x (x) y) x"
TENSOR_TO_PAIR = "fn z: Bool (x) Bool => let a (x) b = z in (a, b)"
IF_OVER_BOX = ("if dist then (sample as in true) (x) (sample as in true) "
               "else (sample as in false) (x) (sample as in false)")
SAMPLE_IF = "sample dist as x in (if x then (true, true) else (false, false))"
DIST = [("dist", TModal(BOOL))]


def ty(text):
    return parse_type(text)


def test_shared_application_rejected_with_both_sites():
    with pytest.raises(TypeCheckError) as e:
        check_ini(None, parse_term(SHARED_APP))
    assert e.value.kind is ErrorKind.SharedAcrossTensor
    assert e.value.var == "x"
    assert len(e.value.sites) == 2


def test_tensor_to_pair_coercion():
    res = check_ini(None, parse_term(TENSOR_TO_PAIR))
    assert res.type == ty("Bool (x) Bool -o Bool * Bool")


def test_if_over_box_rejected():
    with pytest.raises(TypeCheckError) as e:
        check_i(DIST, parse_term(IF_OVER_BOX, Layer.I))
    assert e.value.kind is ErrorKind.LayerMismatch


def test_sample_variant_accepted():
    assert check_i(DIST, parse_term(SAMPLE_IF, Layer.I)).type == TModal(TProd(BOOL, BOOL))


@pytest.mark.parametrize("src,expected", [
    ("true", "Bool"),
    ("coin", "Bool"),
    ("coin (x) coin", "Bool (x) Bool"),
    ("let x = coin in (x, x)", "Bool * Bool"),
    ("fn x: Bool => x", "Bool -o Bool"),
    ("(fn x: Bool => (x, x)) coin", "Bool * Bool"),
    ("let p = coin (x) coin in let a (x) b = p in b (x) a", "Bool (x) Bool"),
    ("fst (coin, true)", "Bool"),
])
def test_ini_accepts(src, expected):
    assert show_type(check_ini(None, parse_term(src)).type) == expected


@pytest.mark.parametrize("src,kind", [
    ("y", ErrorKind.UnboundVar),
    ("let x = coin in x (x) x", ErrorKind.SharedAcrossTensor),
    ("fn f: Bool -o Bool => f (f true)", ErrorKind.SharedAcrossTensor),
    ("true true", ErrorKind.NonFunctionApplied),
    ("fst (coin (x) coin)", ErrorKind.Mismatch),
    ("not true", ErrorKind.PrimUnknown),
    ("inl[Bool + Bool] true", ErrorKind.LayerMismatch),
])
def test_ini_rejects(src, kind):
    with pytest.raises(TypeCheckError) as e:
        check_ini(None, parse_term(src))
    assert e.value.kind is kind


def test_variable_reuse_in_context():
    with pytest.raises(TypeCheckError) as e:
        check_ini([("x", BOOL)], parse_term("x (x) x"))
    assert e.value.kind is ErrorKind.SharedAcrossTensor


def test_weakening_allowed():
    assert check_ini([("x", BOOL), ("y", BOOL)], parse_term("x")).type == BOOL


def test_ni_is_not_affine():
    assert check_ni([("x", BOOL)], parse_term("(x, x)", Layer.NI)).type == TProd(BOOL, BOOL)


def test_ni_case_and_primitives():
    t = parse_term("let x = amb in if x then inl[Bool + Name] x else inr[Bool + Name] fresh", Layer.NI)
    assert show_type(check_ni(None, t).type) == "Bool + Name"
    with pytest.raises(TypeCheckError) as e:
        check_ni(None, t, model="pset")
    assert e.value.kind is ErrorKind.PrimUnknown


def test_ni_rejects_tensor():
    with pytest.raises(TypeCheckError) as e:
        check_ni(None, parse_term("coin (x) coin", Layer.NI))
    assert e.value.kind is ErrorKind.LayerMismatch


def test_sample_body_sees_only_its_binders():
    with pytest.raises(TypeCheckError) as e:
        check_i([("d", TModal(BOOL)), ("e", TModal(BOOL))], parse_term("sample d as x in e", Layer.I))
    assert e.value.kind in (ErrorKind.UnboundVar, ErrorKind.LayerMismatch)


def test_sample_sources_are_split():
    src = parse_term("sample d, d as x, y in (x, y)", Layer.I)
    with pytest.raises(TypeCheckError) as e:
        check_i([("d", TModal(BOOL))], src)
    assert e.value.kind in (ErrorKind.SharedAcrossTensor, ErrorKind.ReusedVar)


def test_duplicate_sample_binders():
    with pytest.raises(TypeCheckError) as e:
        check_i(DIST + [("e", TModal(BOOL))], parse_term("sample d, e as x, x in x", Layer.I))
    assert e.value.kind is ErrorKind.BadSampleArity


def test_i_layer_has_no_constants():
    with pytest.raises(TypeCheckError) as e:
        check_i(None, parse_term("true", Layer.I))
    assert e.value.kind is ErrorKind.LayerMismatch


def test_i_layer_functions_and_sums():
    t = parse_term("fn p: M Bool (x) M Bool => let a (x) b = p in inl[M Bool (+) M Bool] a", Layer.I)
    assert show_type(check_i(None, t).type) == "M Bool (x) M Bool -o M Bool (+) M Bool"


def test_trace_is_preorder():
    res = check_ini(None, parse_term("coin (x) true"))
    assert [r for r, _ in res.trace] == ["⊗Intro", "Coin", "Const"]


def test_let_is_an_application():
    res = check_ini(None, parse_term("let x = coin in x"))
    assert [r for r, _ in res.trace][:2] == ["Application", "Abstraction"]


def test_check_file_uses_assumptions():
    sf = parse("#lang ini2 layer=I\nassume dist : M Bool;\n" + SAMPLE_IF)
    assert check_file(sf).type == TModal(TProd(BOOL, BOOL))


def test_expected_type_mismatch():
    with pytest.raises(TypeCheckError) as e:
        check(Layer.INI, None, parse_term("coin"), TTensor(BOOL, BOOL))
    assert e.value.kind is ErrorKind.Mismatch


def test_accepts_helper():
    assert accepts(Layer.INI, None, parse_term("coin"))
    assert not accepts(Layer.INI, None, parse_term(SHARED_APP))
