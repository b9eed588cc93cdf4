import pytest
from corpus import GOLDEN
from hypothesis import given, settings
from hypothesis import strategies as st

from strictness.attrs import Mode
from strictness.errors import ParseError
from strictness.metatheory import GenConfig, gen_cbn, gen_cbpv
from strictness.syntax import parse_program, show_program, tokenize


def round_trips(p):
    text = show_program(p)
    q = parse_program(text, p.lang, p.mode)
    return q == p and show_program(q) == text


@pytest.mark.parametrize("case", GOLDEN, ids=lambda c: c.name)
def test_corpus_round_trip(case):
    assert round_trips(parse_program(case.source, case.lang))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), lang=st.sampled_from(["cbn", "cbpv"]), mode=st.sampled_from(list(Mode)))
def test_fuzz_round_trip(seed, lang, mode):
    gen = gen_cbn if lang == "cbn" else gen_cbpv
    p = gen(GenConfig(seed=seed, max_depth=6, max_scope=3, mode=mode))
    assert round_trips(p)


def test_header_sets_language_and_mode():
    p = parse_program("lang cbn\nmode extended\nmain = ()")
    assert p.lang == "cbn" and p.mode is Mode.EXTENDED


def test_comments_are_skipped():
    p = parse_program("# a comment\nmain = ret () # trailing\n")
    assert show_program(p).strip().endswith("main = ret ()")


def test_binders_are_renamed_apart():
    p = parse_program("main = fn x : unit . fn x : unit . x; ret ()", "cbpv")
    assert p.main.x != p.main.m.x
    assert round_trips(p)


@pytest.mark.parametrize(
    "src",
    [
        "main = ",
        "main = ret () ret ()",
        "var x : unit\nvar x : unit\nmain = ret ()",
        "var x\nmain = ret ()",
        "mode fancy\nmain = ret ()",
    ],
)
def test_parse_errors(src):
    with pytest.raises(ParseError):
        parse_program(src)


def test_parse_error_location():
    with pytest.raises(ParseError) as info:
        parse_program("main =\n  force ]")
    assert "2:" in str(info.value)


def test_tokens_have_positions():
    toks = tokenize("main = ret ()")
    assert (toks[0].line, toks[0].col) == (1, 1)
    assert toks[2].text == "ret" and toks[2].col == 8
