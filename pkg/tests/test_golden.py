import pytest
from corpus import GOLDEN

from strictness import cbn, cbpv
from strictness.attrs import Mode, VarId
from strictness.program import check_program
from strictness.syntax import parse_program, parse_type, parse_vec


def judge(case):
    p = parse_program(case.source, case.lang)
    c = check_program(p)
    scope = c.ctx.scope
    want_effect = parse_vec(case.effect, scope, p.mode)
    want_type = parse_type(case.ty, case.lang, p.mode, scope)
    return p, c, want_effect, want_type


@pytest.mark.parametrize("case", GOLDEN, ids=lambda c: c.name)
def test_golden_judgment(case):
    p, c, want_effect, want_type = judge(case)
    assert p.mode is case.mode
    assert c.judgment.effect == want_effect
    equal = cbn.type_equal if case.lang == "cbn" else cbpv.type_equal
    assert equal(c.judgment.ty, want_type)


def test_corpus_size():
    assert len(GOLDEN) >= 12


def test_church_booleans_share_a_type_only_with_sub():
    by_name = {c.name: c for c in GOLDEN}
    tys = {n: check_program(parse_program(by_name[n].source, "cbn")).judgment.ty for n in by_name if "church" in n}
    assert not cbn.type_equal(tys["church_true"], tys["church_false"])
    assert cbn.type_equal(tys["church_true_sub"], tys["church_false_sub"])


def test_pair_wf_rejects_claim_without_use():
    # a pair type that claims x strictly cannot come from a derivation leaving x unused
    mode = Mode.EXTENDED
    scope = (VarId("x"), VarId("y"))
    ty = parse_type("unit^{x:L, y:S} * unit^{y:S}", "cbn", mode, scope)
    assert not cbn.wf_type(parse_vec("{y:L}", scope, mode), ty, scope, mode)
    assert cbn.wf_type(parse_vec("{x:L, y:L}", scope, mode), ty, scope, mode)


def test_pair_wf_judgment_is_valid():
    case = next(c for c in GOLDEN if c.name == "pair_wf")
    _, c, _, _ = judge(case)
    assert cbn.wf_type(c.judgment.effect, c.judgment.ty, c.ctx.scope, case.mode)
