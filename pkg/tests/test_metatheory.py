import random
from collections import Counter
from dataclasses import replace

import pytest
from corpus import GOLDEN
from hypothesis import given, settings
from hypothesis import strategies as st

from strictness import cbn, cbpv
from strictness.attrs import Mode
from strictness.metatheory import (
    THEOREMS,
    GenConfig,
    TheoremReport,
    check_determinism,
    check_lazy_soundness,
    check_soundness,
    check_strict_failure,
    check_translation,
    close_program,
    gen_cbn,
    gen_cbpv,
    programs,
    run_campaign,
    shrink,
)
from strictness.program import check_program
from strictness.syntax import parse_program, show_program

CONFIGS = [(lang, mode) for lang in ("cbn", "cbpv") for mode in Mode]


def node_names(t):
    kids = cbn.subterms(t) if t.__class__.__module__.endswith("cbn") else cbpv.children(t)
    yield type(t).__name__
    for k in kids:
        yield from node_names(k)


# ---------------------------------------------------------------- generator


def test_depth_one_gives_ret_unit():
    cfg = GenConfig(seed=3, max_depth=1, max_scope=0)
    for i in range(20):
        p = gen_cbpv(cfg, random.Random(i), goal=cbpv.TF(cbpv.TUnit()))
        assert show_program(p).strip().splitlines()[-1] == "main = ret ()"
        assert not p.decls


@pytest.mark.parametrize("lang,mode", CONFIGS)
def test_seed_determinism(lang, mode):
    cfg = GenConfig(seed=11, mode=mode)
    a = [show_program(p) for p in programs(lang, cfg, 20)]
    b = [show_program(p) for p in programs(lang, cfg, 20)]
    assert a == b
    c = [show_program(p) for p in programs(lang, replace(cfg, seed=12), 20)]
    assert a != c


WANT_CBPV = {"Var", "Unit", "Pair", "Inl", "Inr", "Thunk", "Lam", "Ret", "Let", "Seq", "Split", "Case", "Force", "App", "Sub"}
WANT_CBN = {"Var", "Unit", "Pair", "Inl", "Inr", "Lam", "Let", "Seq", "Split", "Case", "App", "Sub"}


@pytest.mark.parametrize("lang,mode", CONFIGS)
def test_every_form_appears(lang, mode):
    seen = Counter()
    for p in programs(lang, GenConfig(seed=5, max_depth=6, mode=mode), 300):
        for d in p.decls:
            if d.term is not None:
                seen.update(node_names(d.term))
        seen.update(node_names(p.main))
    want = WANT_CBN if lang == "cbn" else WANT_CBPV
    assert want <= set(seen), want - set(seen)


@pytest.mark.parametrize("lang,mode", CONFIGS)
def test_generated_programs_typecheck_in_bounds(lang, mode):
    cfg = GenConfig(seed=2, max_depth=5, max_scope=2, mode=mode)
    for p in programs(lang, cfg, 50):
        check_program(p)
        assert len(p.decls) <= 2


@pytest.mark.parametrize(
    "kw",
    [{"max_depth": 0}, {"max_scope": -1}, {"weights": {"var": -1.0}}, {"weights": {"loop": 1.0}}, {"weights": {"var": 0}}],
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        GenConfig(**kw)


def test_returner_main():
    for p in programs("cbpv", GenConfig(seed=4, returner=True), 30):
        assert isinstance(check_program(p).judgment.ty, cbpv.TF)
    for p in programs("cbn", GenConfig(seed=4, returner=True), 30):
        assert not isinstance(check_program(p).judgment.ty, cbn.TArrow)


# ----------------------------------------------------------------- theorems


@pytest.mark.parametrize("case", GOLDEN, ids=lambda c: c.name)
def test_theorems_hold_on_corpus(case):
    p = close_program(parse_program(case.source, case.lang))
    for name, check in THEOREMS.items():
        if name == "translation" and p.lang != "cbn":
            continue
        r = check(p, random.Random(0))
        assert r.passed, (name, r.counterexample)


def test_close_program_keeps_the_judgment():
    for case in GOLDEN:
        p = parse_program(case.source, case.lang)
        q = close_program(p, random.Random(1))
        assert all(d.term is not None for d in q.decls)
        a, b = check_program(p).judgment, check_program(q).judgment
        assert a.effect == b.effect
        assert (cbn.type_equal if p.lang == "cbn" else cbpv.type_equal)(a.ty, b.ty)


def test_strict_failure_has_obligations():
    p = parse_program("var y : unit = ()\nvar z : unit = ()\nmain = y; z; ret ()")
    r = check_strict_failure(p)
    assert r.passed and r.obligations >= 2


def test_lazy_soundness_has_obligations():
    p = parse_program("var y : unit = ()\nmain = ret thunk{ y; ret () }")
    r = check_lazy_soundness(p)
    assert r.passed and r.obligations >= 1


def test_soundness_applies_closures():
    p = parse_program("var y : unit = ()\nmain = fn x : unit . fn w : unit . x; ret y")
    r = check_soundness(p, random.Random(0))
    assert r.passed and r.obligations >= 2


def test_translation_and_determinism_examples():
    p = parse_program("var z : Bool = true\nmain = let (a, b) = (z, false) in a", "cbn")
    assert check_translation(p).passed
    assert check_determinism(p, random.Random(0)).passed


def test_report_merge_and_json():
    a = TheoremReport("soundness", 2, 0, None, 3)
    b = TheoremReport("soundness", 1, 1, "bad", 1)
    m = a.merge(b)
    assert (m.trials, m.failures, m.obligations, m.counterexample) == (3, 1, 4, "bad")
    assert list(m.to_json()) == ["theorem", "trials", "failures", "obligations", "counterexample"]
    assert not m.passed


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), lang=st.sampled_from(["cbn", "cbpv"]), mode=st.sampled_from(list(Mode)))
def test_soundness_property(seed, lang, mode):
    gen = gen_cbn if lang == "cbn" else gen_cbpv
    p = gen(GenConfig(seed=seed, max_depth=6, max_scope=3, mode=mode))
    r = check_soundness(p, random.Random(seed))
    assert r.passed, r.counterexample


@pytest.mark.parametrize("lang,mode", CONFIGS)
def test_small_campaigns(lang, mode):
    cfg = GenConfig(seed=1, max_depth=6, max_scope=3, mode=mode)
    for name in THEOREMS:
        if name == "translation" and lang != "cbn":
            continue
        r = run_campaign(name, lang, cfg, 15)
        assert r.passed and r.trials == 15, (name, r.counterexample)


# ---------------------------------------------------------------- shrinking


def test_shrink_reduces_a_failing_program():
    # stands in for a buggy checker: "fails" whenever main still mentions y
    p = parse_program("var y : unit = ()\nmain = x <- (y; ret thunk{ ret () }) in z <- force x in ret z")

    def mentions_y(q):
        return "y" in show_program(q).split("main =", 1)[1]

    small = shrink(p, mentions_y)
    assert mentions_y(small)
    assert len(show_program(small)) < len(show_program(p))
    check_program(small)


def test_strict_failure_search_leaves_declaration_bodies_alone():
    # forcing t runs a lambda that lives in a declaration, not in main
    p = parse_program(
        "var y : unit = ()\nvar t : U[{}] F unit = thunk{ (fn z : unit . ret z) () }\nmain = x <- force t in y; ret x\n"
    )
    r = check_strict_failure(p)
    assert r.passed and r.obligations == 2
