import json
import subprocess
import sys

import pytest
from corpus import GOLDEN

from strictness import cli
from strictness.program import check_program, classify, lambda_attrs
from strictness.syntax import parse_program

FORCE = "# nested let and force\nvar y : unit = ()\nmain = x <- ret thunk{ y; ret () } in z <- force x in ret z\n"


@pytest.fixture
def prog(tmp_path):
    def write(text, name="p.cbpv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_text(capsys, prog):
    code, out, _ = run(capsys, "check", prog(FORCE))
    assert code == 0
    assert out.strip() == "y : unit ⊢ x <- ret thunk{ y; ret () } in z <- force x in ret z :^{y:S} F unit"


def test_check_json_key_order(capsys, prog):
    code, out, _ = run(capsys, "check", prog(FORCE), "--json")
    rec = json.loads(out)
    assert code == 0
    assert list(rec) == ["command", "file", "lang", "mode", "context", "term", "effect", "type"]
    assert rec["effect"] == "{y:S}" and rec["type"] == "F unit"


def test_run_and_drop(capsys, prog):
    path = prog(FORCE)
    code, out, _ = run(capsys, "run", path)
    assert code == 0 and out.splitlines()[0] == "ret ()"
    code, out, _ = run(capsys, "run", path, "--drop", "y")
    assert code == 1 and out.strip() == "missing binding: y"
    code, _, err = run(capsys, "run", path, "--env-missing", "nope")
    assert code == 2 and "not a top-level variable" in err


def test_lazy_drop_succeeds(capsys, prog):
    path = prog("var y : unit = ()\nmain = ret thunk{ y; ret () }\n")
    code, out, _ = run(capsys, "run", path, "--drop", "y", "--json")
    rec = json.loads(out)
    assert code == 0 and rec["status"] == "success"


def test_type_error_exit(capsys, prog):
    code, _, err = run(capsys, "check", prog("main = force ()\n"))
    assert code == 1 and err.startswith("error: NotAThunk:")


def test_parse_error_exit(capsys, prog):
    code, _, err = run(capsys, "check", prog("main = \n"))
    assert code == 1 and "ParseError" in err


def test_missing_file(capsys):
    code, _, err = run(capsys, "check", "/nonexistent/x.cbpv")
    assert code == 2


def test_translate(capsys, prog):
    path = prog("var z : Bool = true\nmain = (z, true)\n", "pair.cbn")
    code, out, _ = run(capsys, "translate", path)
    assert code == 0
    text = out.rsplit("# main", 1)[0]
    back = parse_program(text, "cbpv")
    check_program(back)
    code, _, err = run(capsys, "translate", prog(FORCE))
    assert code == 2


def test_mode_precedence(capsys, prog, monkeypatch):
    plain = prog("var x : unit\nmain = (x, x)\n", "m.cbn")
    headed = prog("mode base\nvar x : unit\nmain = (x, x)\n", "h.cbn")
    monkeypatch.setenv(cli.MODE_ENV, "extended")
    assert json.loads(run(capsys, "check", plain, "--json")[1])["mode"] == "extended"
    assert json.loads(run(capsys, "check", plain, "--json", "--mode", "base")[1])["mode"] == "base"
    assert json.loads(run(capsys, "check", headed, "--json", "--mode", "extended")[1])["mode"] == "base"
    monkeypatch.delenv(cli.MODE_ENV)
    assert json.loads(run(capsys, "check", plain, "--json")[1])["mode"] == "base"


def test_verify(capsys, prog):
    code, out, _ = run(capsys, "verify", prog(FORCE), "--json")
    recs = [json.loads(line) for line in out.splitlines()]
    assert code == 0
    assert [r["theorem"] for r in recs] == ["soundness", "lazy_soundness", "strict_failure", "determinism"]
    assert all(r["failures"] == 0 for r in recs)


def test_fuzz(capsys):
    code, out, _ = run(capsys, "fuzz", "--lang", "cbn", "--n", "5", "--seed", "3", "--json")
    recs = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and len(recs) == 5
    assert all(r["trials"] == 5 for r in recs)


def test_fuzz_bad_config(capsys):
    code, _, _ = run(capsys, "fuzz", "--depth", "0")
    assert code == 2


@pytest.mark.parametrize("case", GOLDEN, ids=lambda c: c.name)
def test_report_agrees_with_judgment(capsys, prog, case):
    ext = ".cbn" if case.lang == "cbn" else ".cbpv"
    path = prog(case.source, "g" + ext)
    code, out, _ = run(capsys, "report", path, "--json")
    assert code == 0
    recs = [json.loads(line) for line in out.splitlines()]
    c = check_program(parse_program(case.source, case.lang))
    variables = [(str(x), str(a), classify(a)) for x, a in c.judgment.effect.items()]
    lambdas = [(str(x), str(a), classify(a)) for _, x, a in lambda_attrs(c)]
    assert [(r["name"], r["attr"], r["class"]) for r in recs if r["kind"] == "variable"] == variables
    assert [(r["name"], r["attr"], r["class"]) for r in recs if r["kind"] == "lambda"] == lambdas


def _cli(*argv):
    return subprocess.run([sys.executable, "-m", "strictness.cli", *argv], capture_output=True, check=False)


@pytest.mark.parametrize("command", ["check", "report", "verify", "run"])
def test_json_byte_stable(prog, command):
    path = prog(FORCE)
    a, b = _cli(command, path, "--json"), _cli(command, path, "--json")
    assert a.returncode == 0
    assert a.stdout == b.stdout and a.stdout


def test_fuzz_byte_stable():
    argv = ("fuzz", "--lang", "cbpv", "--n", "5", "--seed", "9", "--json")
    assert _cli(*argv).stdout == _cli(*argv).stdout
