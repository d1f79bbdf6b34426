import io
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from inicalc.cli import main

PROGRAMS = Path(__file__).resolve().parent.parent / "demos" / "programs"


def run(*argv):
    buf = io.StringIO()
    code = main([str(a) for a in argv], stream=buf)
    return code, buf.getvalue()


def prog(name):
    return PROGRAMS / name


def write(tmp_path, text, name="p.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_check_true(tmp_path):
    assert run("check", write(tmp_path, "true")) == (0, "Bool\n")


def test_check_tensor_to_pair():
    assert run("check", prog("tensor_to_pair.ini")) == (0, "Bool (x) Bool -o Bool * Bool\n")


def test_check_rejected_if_over_box():
    code, out = run("check", prog("if_over_box.ini"))
    assert code == 1 and "LayerMismatch" in out
    code, out = run("check", prog("if_over_box.ini"), "--format", "json")
    err = json.loads(out)["error"]
    assert err["kind"] == "LayerMismatch" and err["line"] == 4


def test_check_shared_application_names_sites():
    code, out = run("check", prog("shared_application.ini"), "--format", "json")
    err = json.loads(out)["error"]
    assert code == 1 and err["kind"] == "SharedAcrossTensor" and err["var"] == "x"
    assert len(err["sites"]) == 2


def test_eval_correlated_json():
    assert run("eval", prog("correlated.ini"), "--format", "json") == \
        (0, '{"(tt,tt)":"1/2","(ff,ff)":"1/2"}\n')


def test_eval_fresh_pair():
    assert run("eval", prog("fresh_pair.ini"), "--model", "name", "--format", "json") == \
        (0, '{"names":2,"value":"(n0,n1)"}\n')


def test_eval_coin_under_pset_fails():
    code, out = run("eval", prog("coin.ini"), "--model", "pset")
    assert code == 1 and "PrimUnknown" in out


def test_eval_open_program_fails():
    code, out = run("eval", prog("sample_if.ini"))
    assert code == 1 and "NotClosed" in out


def test_independence_two_coins():
    code, out = run("independence", prog("two_coins.ini"), "--format", "json")
    assert code == 0 and json.loads(out)["isProduct"] is True


def test_independence_boxes_prints_joint():
    code, out = run("independence", prog("coin_boxes.ini"), "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["isProduct"] and rep["joint"]["(tt,ff)"] == "1/4"


def test_independence_on_product_type():
    code, out = run("independence", prog("correlated.ini"))
    assert code == 1 and "not a tensor type" in out
    code, out = run("independence", prog("correlated.ini"), "--allow-shared", "--format", "json")
    rep = json.loads(out)
    assert code == 1 and rep["isProduct"] is False
    assert rep["witness"] == {"pair": "(tt,ff)", "joint": "0/1", "product": "1/4"}


def test_translate_mult():
    code, out = run("translate", prog("two_coins.ini"), "--fragment", "mult")
    assert code == 0
    assert out.splitlines()[-1] == "(sample as in coin) (x) (sample as in coin)"


def test_translate_ni():
    code, out = run("translate", prog("two_coins.ini"), "--fragment", "ni")
    assert code == 0 and out.splitlines()[1:] == ["#lang ini2 layer=NI", "(coin, coin)"]


def test_translate_outside_fragment():
    code, out = run("translate", prog("tensor_to_pair.ini"), "--fragment", "mult")
    assert code == 1 and "NotInFragment" in out


def test_suite_equations_small():
    code, out = run("suite", "equations", "--seed", "7", "--count", "5", "--model", "dist")
    assert code == 0 and out.strip().endswith("ok")
    assert out.count("PASS") == 14


def test_suite_json_is_deterministic():
    args = ("suite", "soundness", "--seed", "7", "--count", "30", "--format", "json")
    assert run(*args) == run(*args)
    assert json.loads(run(*args)[1])["ok"] is True


def test_gen_prints_terms():
    code, out = run("gen", "--type", "Bool (x) Bool", "--depth", "3", "--count", "4", "--seed", "1")
    assert code == 0 and len(out.splitlines()) == 4


def test_missing_file():
    code, out = run("check", "/nonexistent/file.ini")
    assert code == 1 and "IOError" in out


def test_parse_error_json(tmp_path):
    code, out = run("check", write(tmp_path, "let x = in x"), "--format", "json")
    err = json.loads(out)["error"]
    assert code == 1 and err["kind"] == "ParseError" and err["span"] == [8, 10]


def test_module_entry_point_no_color():
    env = {**os.environ, "INI_COLOR": "0"}
    out = subprocess.run([sys.executable, "-m", "inicalc", "check", str(prog("two_coins.ini"))],
                         capture_output=True, text=True, env=env)
    assert out.returncode == 0 and out.stdout == "Bool (x) Bool\n"
    assert "\x1b[" not in out.stdout


def test_bad_arguments_are_user_errors():
    with pytest.raises(SystemExit) as e:
        main(["eval"])
    assert e.value.code == 1
