"""Command-line front end.

Exit codes: 0 on success, 1 for user or input errors (unreadable file, parse
or type error, missing primitive, unsupported observation), 2 when an
internal invariant fails (a suite failure or a tensor that does not
factorize, either of which would be a bug).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from .checker import TypeCheckError, check_file
from .evaluator import EvalError, UnsupportedType, eval_erased, eval_ini, eval_ni
from .generate import GenConfig, GenExhausted, generate_terms
from .models import MODEL_IDS, get_model, render, to_json
from .oracle import NotAPairSupport, check_factorization, check_tensor_soundness_i, \
    check_tensor_soundness_ini, report_to_json
from .parser import ParseError, SourceFile, parse, parse_type, pretty, pretty_file, show_type
from .suites import equations_suite, fullabstraction_suite, soundness_suite
from .syntax import Layer, TProd, contains_arrow
from .translate import Fragment, NotInFragment, translate

EXIT_OK, EXIT_USER, EXIT_INTERNAL = 0, 1, 2


class UserError(Exception):
    def __init__(self, message: str, kind: str = "UserError"):
        self.kind = kind
        super().__init__(message)


class _Out:
    def __init__(self, fmt: str, stream=None):
        self.fmt = fmt
        self.stream = stream or sys.stdout
        self.color = os.environ.get("INI_COLOR", "1") != "0" and self.stream.isatty()

    def paint(self, text: str, code: str) -> str:
        return f"\x1b[{code}m{text}\x1b[0m" if self.color else text

    def json(self, obj) -> None:
        print(json.dumps(obj, separators=(",", ":"), ensure_ascii=False), file=self.stream)

    def line(self, text: str = "") -> None:
        print(text, file=self.stream)


def _read(path: str) -> tuple:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise UserError(f"{path}: cannot read: {e.strerror}", "IOError") from None
    return text, parse(text)


def _position(text: str, offset: int) -> tuple:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def _diagnostic(out: _Out, path: str, text: str, kind: str, span, message: str, extra=None) -> None:
    start = span.start if span is not None else 0
    line, col = _position(text, start)
    if out.fmt == "json":
        err = {"kind": kind, "message": message, "line": line, "col": col}
        if span is not None:
            err["span"] = [span.start, span.end]
        err.update(extra or {})
        out.json({"ok": False, "error": err})
        return
    out.line(f"{path}:{line}:{col}: {out.paint('error', '1;31')}[{kind}]: {message}")
    src = text.splitlines()[line - 1] if text.splitlines() else ""
    width = max(1, (span.end - span.start) if span is not None else 1)
    out.line(f"  {src}")
    out.line("  " + " " * (col - 1) + "^" * min(width, max(1, len(src) - col + 1)))


def _load_checked(out: _Out, path: str, model: Optional[str]):
    """(text, source file, typing result); raises on any user error."""
    text, sf = _read(path)
    return text, sf, check_file(sf, model)


def _closed(sf: SourceFile) -> None:
    if sf.assumptions:
        names = ", ".join(x for x, _ in sf.assumptions)
        raise UserError(f"main term is not closed (assumes {names})", "NotClosed")


def _run(fn, args, out: _Out) -> int:
    try:
        return fn(args, out)
    except ParseError as e:
        text = _safe_text(args.file) if hasattr(args, "file") else ""
        _diagnostic(out, getattr(args, "file", "<input>"), text, "ParseError", e.span, e.message,
                    {"expected": sorted(e.expected)})
        return EXIT_USER
    except TypeCheckError as e:
        text = _safe_text(args.file)
        extra = {"var": e.var} if e.var else {}
        if e.sites:
            extra["sites"] = [[s.start, s.end] for s in e.sites if s is not None]
        _diagnostic(out, args.file, text, e.kind.value, e.span, e.explanation, extra)
        return EXIT_USER
    except (UserError, EvalError, NotInFragment, GenExhausted, ValueError) as e:
        kind = getattr(e, "kind", None) or type(e).__name__
        if out.fmt == "json":
            out.json({"ok": False, "error": {"kind": kind, "message": str(e)}})
        else:
            out.line(f"{out.paint('error', '1;31')}[{kind}]: {e}")
        return EXIT_USER


def _safe_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError:
        return ""


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_check(args, out: _Out) -> int:
    _, sf, res = _load_checked(out, args.file, args.model)
    if out.fmt == "json":
        out.json({"ok": True, "layer": sf.layer.value, "type": show_type(res.type)})
    else:
        out.line(show_type(res.type))
    return EXIT_OK


def _evaluate(sf: SourceFile, ty, model):
    t = sf.elaborated()
    if sf.layer is Layer.INI:
        if contains_arrow(ty):
            raise UnsupportedType(f"cannot observe a value of type {show_type(ty)}")
        return eval_ini(model, {}, t)
    if sf.layer is Layer.NI:
        return eval_ni(model, {}, t)
    return eval_erased(model, {}, t, ty)


def cmd_eval(args, out: _Out) -> int:
    _, sf, res = _load_checked(out, args.file, args.model)
    _closed(sf)
    model = get_model(args.model)
    m = _evaluate(sf, res.type, model)
    if out.fmt == "json":
        out.json(to_json(model, m))
    else:
        out.line(render(model, m))
    return EXIT_OK


def cmd_independence(args, out: _Out) -> int:
    _, sf, res = _load_checked(out, args.file, args.model)
    _closed(sf)
    model = get_model(args.model)
    shared = isinstance(res.type, TProd) and sf.layer is not Layer.I
    if shared and args.allow_shared:
        # a shared pair may legitimately be correlated: report, exit 1 if so
        rep = check_factorization(model, _evaluate(sf, res.type, model))
        code = EXIT_OK if rep.is_product else EXIT_USER
    elif sf.layer is Layer.INI:
        rep = check_tensor_soundness_ini(model, sf.elaborated())
        code = EXIT_OK if rep.is_product else EXIT_INTERNAL
    elif sf.layer is Layer.I:
        rep = check_tensor_soundness_i(model, sf.elaborated())
        code = EXIT_OK if rep.is_product else EXIT_INTERNAL
    else:
        raise UnsupportedType(f"not a tensor type: {show_type(res.type)}")
    if out.fmt == "json":
        out.json(report_to_json(model, rep))
        return code
    verdict = out.paint("independent", "32") if rep.is_product else out.paint("correlated", "1;31")
    out.line(f"isProduct: {str(rep.is_product).lower()} ({verdict})")
    out.line(f"joint:     {render(model, rep.joint)}")
    out.line(f"marginal1: {render(model, rep.marginal1)}")
    out.line(f"marginal2: {render(model, rep.marginal2)}")
    if rep.witness is not None:
        w = report_to_json(model, rep)["witness"]
        out.line("witness:   " + ", ".join(f"{k}={v}" for k, v in w.items()))
    if rep.disjoint is not None:
        out.line(f"disjoint names: {str(rep.disjoint).lower()}")
    return code


_FRAGMENTS = {"ni": Fragment.ArrowFree, "mult": Fragment.Multiplicative}


def cmd_translate(args, out: _Out) -> int:
    _, sf, res = _load_checked(out, args.file, None)
    if sf.layer is not Layer.INI:
        raise UserError("translate expects a one-level (#lang ini1) program")
    _closed(sf)
    frag = _FRAGMENTS[args.fragment]
    u, uty = translate(sf.elaborated(), frag, res.type)
    target = Layer.NI if frag is Fragment.ArrowFree else Layer.I
    text = pretty_file(SourceFile("ini2", target, (), u))
    if out.fmt == "json":
        out.json({"ok": True, "fragment": frag.value, "type": show_type(uty), "program": text})
    else:
        out.line(f"-- : {show_type(uty)}")
        out.stream.write(text)
    return EXIT_OK


def cmd_suite(args, out: _Out) -> int:
    models = tuple(args.model) if args.model else None
    if args.kind == "equations":
        rep = equations_suite(args.seed, args.count or 50, args.depth or 4, models or MODEL_IDS)
    elif args.kind == "soundness":
        rep = soundness_suite(args.seed, args.count or 500, args.depth or 6, models or ("dist",))
    else:
        rep = fullabstraction_suite(args.seed, args.count or 200, args.depth or 5)
    if out.fmt == "json":
        out.json(rep.to_json())
    else:
        for line in rep.to_text().splitlines():
            line = line.replace("PASS", out.paint("PASS", "32")).replace("FAIL", out.paint("FAIL", "1;31"))
            out.line(line)
    return EXIT_OK if rep.ok else EXIT_INTERNAL


_LAYERS = {"ini": Layer.INI, "ni": Layer.NI, "i": Layer.I}


def cmd_gen(args, out: _Out) -> int:
    layer = _LAYERS[args.layer]
    ty = parse_type(args.type) if args.type else None
    fragment = {"ni": "ArrowFree", "mult": "Multiplicative"}.get(args.fragment)
    cfg = GenConfig(max_depth=args.depth, seed=args.seed, target_type=ty, layer=layer,
                    model=args.model, count=args.count, fragment=fragment)
    terms = generate_terms(cfg)
    if out.fmt == "json":
        out.json([pretty(t) for t in terms])
    else:
        for t in terms:
            out.line(pretty(t))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


class _ArgParser(argparse.ArgumentParser):
    # usage mistakes are user errors (1); 2 is reserved for invariant failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USER, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _ArgParser(prog="inicalc", description="Typecheck, evaluate and test "
                                "programs of the independence/non-independence calculi.")
    sub = p.add_subparsers(dest="command", required=True)

    def fmt(sp):
        sp.add_argument("--format", choices=("text", "json"), default="text")

    sp = sub.add_parser("check", help="print the type of a program or a diagnostic")
    sp.add_argument("file")
    sp.add_argument("--model", choices=MODEL_IDS, default=None,
                    help="also require the primitives to exist in this model")
    fmt(sp)
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("eval", help="evaluate a closed program exactly")
    sp.add_argument("file")
    sp.add_argument("--model", choices=MODEL_IDS, default="dist")
    fmt(sp)
    sp.set_defaults(fn=cmd_eval)

    sp = sub.add_parser("independence", help="run the factorization oracle on a tensor program")
    sp.add_argument("file")
    sp.add_argument("--model", choices=MODEL_IDS, default="dist")
    sp.add_argument("--allow-shared", action="store_true",
                    help="also analyse programs of shared product type")
    fmt(sp)
    sp.set_defaults(fn=cmd_independence)

    sp = sub.add_parser("translate", help="embed a one-level program into the two-level calculus")
    sp.add_argument("file")
    sp.add_argument("--fragment", choices=tuple(_FRAGMENTS), required=True)
    fmt(sp)
    sp.set_defaults(fn=cmd_translate)

    sp = sub.add_parser("suite", help="run a property suite")
    sp.add_argument("kind", choices=("equations", "soundness", "fullabstraction"))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=None)
    sp.add_argument("--depth", type=int, default=None)
    sp.add_argument("--model", choices=MODEL_IDS, action="append",
                    help="restrict to a model (repeatable)")
    fmt(sp)
    sp.set_defaults(fn=cmd_suite)

    sp = sub.add_parser("gen", help="print random well-typed closed terms")
    sp.add_argument("--layer", choices=tuple(_LAYERS), default="ini")
    sp.add_argument("--type", default=None, help="target type, e.g. 'Bool (x) Bool'")
    sp.add_argument("--depth", type=int, default=4)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=10)
    sp.add_argument("--model", choices=MODEL_IDS, default="dist")
    sp.add_argument("--fragment", choices=tuple(_FRAGMENTS), default=None)
    fmt(sp)
    sp.set_defaults(fn=cmd_gen)
    return p


def main(argv=None, stream=None) -> int:
    args = build_parser().parse_args(argv)
    out = _Out(args.format, stream)
    try:
        return _run(args.fn, args, out)
    except (AssertionError, NotAPairSupport) as e:
        out.line(f"internal error: {e}")
        return EXIT_INTERNAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
