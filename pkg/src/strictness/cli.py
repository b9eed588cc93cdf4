"""Command line: check, translate, run, report, verify and fuzz program files.

Exit codes: 0 on success, 1 on a type error, parse error, failed run or
failed theorem check, 2 on a usage error. With --json every command prints
JSON lines whose keys come in a fixed order.

The mode of a file comes from its `mode` header, else --mode, else the
STRICTNESS_MODE environment variable, else base. The language comes from
the `lang` header, else the file extension (.cbn or .cbpv), else cbpv.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from strictness import cbpv
from strictness.attrs import Mode
from strictness.errors import StrictnessError
from strictness.evaluation import FailMissing, Success, eval_comp
from strictness.metatheory import THEOREMS, GenConfig, close_program, run_campaign
from strictness.program import build_env, check_program, classify, lambda_attrs, lower
from strictness.syntax import (
    Decl,
    Program,
    parse_program,
    show_cbn_ctx,
    show_cbn_type,
    show_cbpv_ctx,
    show_ctype,
    show_program,
    show_term,
    show_terminal,
    show_vtype,
)

MODE_ENV = "STRICTNESS_MODE"


class UsageError(Exception):
    pass


def _emit(args, record: dict, text: str):
    if args.json:
        print(json.dumps(record, ensure_ascii=False))
    else:
        print(text)


def default_mode(flag) -> Mode:
    text = flag or os.environ.get(MODE_ENV) or "base"
    try:
        return Mode.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def load(path: str, mode_flag=None) -> Program:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    lang = p.suffix[1:] if p.suffix in (".cbn", ".cbpv") else "cbpv"
    return parse_program(p.read_text(encoding="utf-8"), lang, default_mode(mode_flag))


def _show_type(t, lang, mode) -> str:
    if lang == "cbn":
        return show_cbn_type(t, mode)
    return show_ctype(t, mode) if isinstance(t, (cbpv.TF, cbpv.TArrow)) else show_vtype(t, mode)


def _show_ctx(ctx, lang, mode) -> str:
    return show_cbn_ctx(ctx, mode) if lang == "cbn" else show_cbpv_ctx(ctx, mode)


def full_vec(g) -> str:
    """A vector with every entry shown, defaults included."""
    return "{" + ", ".join(f"{x}:{a}" for x, a in g.items()) + "}"


def _judgment_line(ctx_text: str, term: str, effect: str, ty: str) -> str:
    head = f"{ctx_text} ⊢" if ctx_text else "⊢"
    return f"{head} {term} :^{effect} {ty}"


# ---------------------------------------------------------------- commands


def cmd_check(args) -> int:
    prog = load(args.file, args.mode)
    c = check_program(prog)
    mode, lang = prog.mode, prog.lang
    j = c.judgment
    ctx_text = _show_ctx(c.ctx, lang, mode)
    term = show_term(prog.main, lang, mode)
    record = {
        "command": "check",
        "file": args.file,
        "lang": lang,
        "mode": mode.value,
        "context": ctx_text,
        "term": term,
        "effect": full_vec(j.effect),
        "type": _show_type(j.ty, lang, mode),
    }
    _emit(args, record, _judgment_line(ctx_text, term, record["effect"], record["type"]))
    return 0


def translated_program(c) -> tuple:
    """The CBPV program a CBN program translates to, and its lowering."""
    low = lower(c)
    decls = []
    for (name, v), (x, a) in zip(low.decls, low.ctx.entries):
        decls.append(Decl(name, a, None, v))
    return Program("cbpv", c.mode, decls, low.main), low


def cmd_translate(args) -> int:
    prog = load(args.file, args.mode)
    if prog.lang != "cbn":
        raise UsageError("translate expects a CBN program")
    out, low = translated_program(check_program(prog))
    mode = prog.mode
    record = {
        "command": "translate",
        "file": args.file,
        "mode": mode.value,
        "program": show_program(out),
        "effect": full_vec(low.judgment.effect),
        "type": show_ctype(low.judgment.ty, mode),
    }
    text = show_program(out) + f"# main :^{record['effect']} {record['type']}"
    _emit(args, record, text)
    return 0


def _dropped(args, scope) -> tuple:
    names = []
    for group in (args.drop or []) + (args.env_missing or []):
        names.extend(n.strip() for n in group.split(",") if n.strip())
    unknown = [n for n in names if n not in scope]
    if unknown:
        raise UsageError(f"not a top-level variable: {', '.join(unknown)}")
    return tuple(names)


def cmd_run(args) -> int:
    prog = load(args.file, args.mode)
    missing = _dropped(args, prog.scope)
    low = lower(check_program(prog))
    mode = prog.mode
    env = build_env(low, missing=set(missing))
    out = eval_comp(env, low.main, mode)
    record = {"command": "run", "file": args.file, "dropped": list(missing)}
    if isinstance(out, Success):
        record.update(status="success", terminal=show_terminal(out.terminal, mode), effect=full_vec(out.effect))
        _emit(args, record, f"{record['terminal']}\neffect {record['effect']}")
        return 0
    if isinstance(out, FailMissing):
        record.update(status="missing", variable=str(out.x))
        _emit(args, record, f"missing binding: {out.x}")
    else:
        record.update(status="stuck", reason=out.reason)
        _emit(args, record, f"stuck: {out.reason}")
    return 1


def report_records(c) -> list:
    """One record per top-level variable, then one per lambda in main."""
    out = []
    for x, a in c.judgment.effect.items():
        out.append({"kind": "variable", "name": str(x), "line": None, "col": None, "attr": str(a), "class": classify(a)})
    for loc, x, a in lambda_attrs(c):
        line, col = loc if loc is not None else (None, None)
        out.append({"kind": "lambda", "name": str(x), "line": line, "col": col, "attr": str(a), "class": classify(a)})
    return out


def cmd_report(args) -> int:
    prog = load(args.file, args.mode)
    c = check_program(prog)
    for r in report_records(c):
        where = f" at {r['line']}:{r['col']}" if r["line"] is not None else ""
        text = f"{r['kind']} {r['name']}{where}: {r['attr']} ({r['class']})"
        _emit(args, {"command": "report", "file": args.file, **r}, text)
    return 0


def _show_report(r) -> str:
    status = "pass" if r.passed else "FAIL"
    text = f"{r.theorem}: {status} ({r.trials} trials, {r.failures} failures, {r.obligations} obligations)"
    if r.counterexample:
        text += "\n" + r.counterexample
    return text


def cmd_verify(args) -> int:
    prog = load(args.file, args.mode)
    check_program(prog)
    # abstract declarations get generated definitions so main can run closed
    prog = close_program(prog)
    names = args.theorem or [t for t in THEOREMS if prog.lang == "cbn" or t != "translation"]
    ok = True
    for name in names:
        if name == "translation" and prog.lang != "cbn":
            raise UsageError("the translation check needs a CBN program")
        r = THEOREMS[name](prog)
        ok = ok and r.passed
        _emit(args, {"command": "verify", "file": args.file, **r.to_json()}, _show_report(r))
    return 0 if ok else 1


def cmd_fuzz(args) -> int:
    mode = default_mode(args.mode)
    try:
        cfg = GenConfig(
            seed=args.seed, max_depth=args.depth, max_scope=args.scope, mode=mode, returner=args.returner
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    names = args.theorem or [t for t in THEOREMS if args.lang == "cbn" or t != "translation"]
    ok = True
    for name in names:
        if name == "translation" and args.lang != "cbn":
            raise UsageError("the translation check needs --lang cbn")
        r = run_campaign(name, args.lang, cfg, args.n, do_shrink=not args.no_shrink)
        ok = ok and r.passed
        record = {
            "command": "fuzz",
            "lang": args.lang,
            "mode": mode.value,
            "seed": args.seed,
            "depth": args.depth,
            "scope": args.scope,
            **r.to_json(),
        }
        _emit(args, record, _show_report(r))
    return 0 if ok else 1


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="strictness", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, file=True):
        if file:
            p.add_argument("file", help="program file (.cbn or .cbpv)")
        p.add_argument("--mode", choices=["base", "extended"], help=f"default mode (else ${MODE_ENV}, else base)")
        p.add_argument("--json", action="store_true", help="print JSON lines")

    p = sub.add_parser("check", help="typecheck and print main's judgment")
    common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("translate", help="translate a CBN program into CBPV")
    common(p)
    p.set_defaults(fn=cmd_translate)

    p = sub.add_parser("run", help="evaluate main, optionally with bindings removed")
    common(p)
    p.add_argument("--drop", action="append", metavar="X[,Y...]", help="leave these top-level variables unbound")
    p.add_argument("--env-missing", action="append", metavar="X[,Y...]", help="same as --drop")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("report", help="classify top-level variables and lambda arguments")
    common(p)
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("verify", help="check the metatheorems on one program")
    common(p)
    p.add_argument("--theorem", action="append", choices=list(THEOREMS))
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("fuzz", help="check the metatheorems on generated programs")
    common(p, file=False)
    p.add_argument("--lang", choices=["cbn", "cbpv"], default="cbpv")
    p.add_argument("--n", type=int, default=100, help="programs per theorem")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--scope", type=int, default=3)
    p.add_argument("--returner", action="store_true", help="give main a returner type")
    p.add_argument("--no-shrink", action="store_true")
    p.add_argument("--theorem", action="append", choices=list(THEOREMS))
    p.set_defaults(fn=cmd_fuzz)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"strictness: {exc}", file=sys.stderr)
        return 2
    except StrictnessError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
