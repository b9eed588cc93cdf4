import pytest

from strictness import cbn, cbpv
from strictness.attrs import Attr, AttrVec, Mode, VarId, vec_plus
from strictness.errors import (
    IllegalAttribute,
    IllFormedType,
    NotAFunction,
    NotAThunk,
    ParseError,
    SubsumptionNotBelow,
    TypeMismatch,
)
from strictness.program import check_program, lower, with_unused
from strictness.syntax import parse_program, parse_type, parse_vec
from strictness.translate import translate_type


def check(src, lang="cbpv"):
    return check_program(parse_program(src, lang))


@pytest.mark.parametrize(
    "src,lang,err",
    [
        ("main = force ()", "cbpv", NotAThunk),
        ("main = () ()", "cbn", NotAFunction),
        ("var x : unit\nmain = sub[{x:S}] ret ()", "cbpv", SubsumptionNotBelow),
        ("var x : unit = thunk{ ret () }\nmain = ret x", "cbpv", TypeMismatch),
        ("main = y", "cbn", ParseError),
        ("main = ret U", "cbpv", ParseError),
    ],
)
def test_rejected(src, lang, err):
    with pytest.raises(err):
        check(src, lang)


def test_u_needs_extended_mode():
    with pytest.raises((ParseError, IllegalAttribute)):
        check("var x : unit\nmain = sub[{x:U}] ret ()")
    c = check("mode extended\nvar x : unit\nmain = sub[{x:L}] ret ()")
    assert c.judgment.effect[VarId("x")] is Attr.L


def test_sub_moves_down_only():
    c = check("var x : unit\nmain = sub[{x:?}] (x; ret ())")
    assert c.judgment.effect[VarId("x")] is Attr.Q


def test_case_branches_must_agree():
    src = "var b : Bool\nvar x : unit\nmain = case b of inl p -> (x; ret ()) | inr q -> ret ()"
    with pytest.raises(TypeMismatch):
        check(src)
    src = "var b : Bool\nvar x : unit\nmain = case b of inl p -> sub[{x:?}] (x; ret ()) | inr q -> sub[{x:?}] ret ()"
    g = check(src).judgment.effect
    assert g[VarId("b")] is Attr.S
    assert g[VarId("x")] is Attr.Q


def test_both_branches_strict():
    src = "var b : Bool\nvar x : unit\nmain = case b of inl p -> (x; ret ()) | inr q -> (x; ret ())"
    assert check(src).judgment.effect[VarId("x")] is Attr.S


def test_cbn_let_is_lazy_in_bound_term():
    c = check("var x : unit\nmain = let y = x in ()", "cbn")
    assert c.judgment.effect[VarId("x")] is Attr.L
    c = check("var x : unit\nmain = let y = x in y; ()", "cbn")
    assert c.judgment.effect[VarId("x")] is Attr.S


@pytest.mark.parametrize("mode", list(Mode))
def test_unused_variable_gets_default(mode):
    p = parse_program("var x : unit\nmain = x; ()", "cbn", mode)
    c = check_program(p)
    ctx, term = with_unused("cbn", c.ctx, p.main, mode)
    j = cbn.cbn_synth(ctx, term, mode)
    want = Attr.U if mode is Mode.EXTENDED else Attr.L
    assert j.effect[VarId("_unused")] is want


def test_translation_of_types():
    mode = Mode.BASE
    scope = (VarId("z"),)
    t = parse_type("Bool^{z:S} * unit", "cbn", mode, scope)
    tr = translate_type(t, scope, mode)
    want = parse_type("F ((U[{z:S}] F ((U[{}] F unit) + (U[{}] F unit))) * (U[{}] F unit))", "cbpv", mode, scope)
    assert cbpv.type_equal(tr.target, want)
    assert tr.residual == AttrVec.default(scope, mode)


def test_translation_of_arrow_has_residual():
    mode = Mode.BASE
    scope = (VarId("y"),)
    t = parse_type("(x :S unit) -[{y:S}]-> unit", "cbn", mode, scope)
    tr = translate_type(t, scope, mode)
    assert tr.residual == parse_vec("{y:S}", scope, mode)
    assert isinstance(tr.target, cbpv.TArrow)


def test_lowered_cbn_judgment_adds_residual():
    mode = Mode.BASE
    src = "var y : Bool\nmain = fn x : Bool ^ {y:S} . x"
    c = check_program(parse_program(src, "cbn", mode))
    low = lower(c)
    tr = translate_type(c.judgment.ty, c.ctx.scope, mode)
    assert low.judgment.effect == vec_plus(c.judgment.effect, tr.residual, mode)
    assert cbpv.type_equal(low.judgment.ty, tr.target)


def test_memo_checker_agrees():
    src = "var y : unit\nmain = z <- (x <- ret () in ret thunk{ x; ret y }) in force z"
    c = check(src)
    memo = cbpv.MemoChecker(Mode.BASE)
    j = memo.comp(c.ctx, c.program.main)
    assert j.effect == c.judgment.effect and j.ty == c.judgment.ty
    again = memo.comp(c.ctx, c.program.main)
    assert again.effect == j.effect


def test_extended_lambda_return_must_carry_argument_usage():
    # the argument's latent use of y has to show up in the return type
    src = "mode extended\nvar y : Bool\nmain = fn x : Bool ^ {y:S} . x"
    with pytest.raises(IllFormedType):
        check(src, "cbn")
