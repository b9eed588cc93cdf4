"""Print the golden corpus as judgments next to the expected effect and type.

    python3 scripts/golden.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from corpus import GOLDEN  # noqa: E402

from strictness import cbn, cbpv  # noqa: E402
from strictness.cli import full_vec  # noqa: E402
from strictness.program import check_program  # noqa: E402
from strictness.syntax import parse_program, parse_type, parse_vec, show_term  # noqa: E402
from strictness.cli import _show_type  # noqa: E402


def main():
    bad = 0
    for case in GOLDEN:
        p = parse_program(case.source, case.lang)
        c = check_program(p)
        j = c.judgment
        scope = c.ctx.scope
        equal = cbn.type_equal if case.lang == "cbn" else cbpv.type_equal
        ok = j.effect == parse_vec(case.effect, scope, p.mode) and equal(j.ty, parse_type(case.ty, case.lang, p.mode, scope))
        bad += not ok
        print(f"{'ok ' if ok else 'BAD'} {case.name:18} {show_term(p.main, p.lang, p.mode)}")
        print(f"    got      :^{full_vec(j.effect)} {_show_type(j.ty, p.lang, p.mode)}")
        print(f"    expected :^{case.effect} {case.ty}")
    print(f"{len(GOLDEN) - bad}/{len(GOLDEN)} exact")
    raise SystemExit(1 if bad else 0)


if __name__ == "__main__":
    main()
