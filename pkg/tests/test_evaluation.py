import pytest

from strictness.attrs import Attr, AttrVec, Mode, VarId
from strictness.evaluation import (
    FailMissing,
    FuelExhausted,
    Success,
    TLam,
    TRet,
    WThunk,
    WUnit,
    apply_closure,
    drop_binding,
    eq_mod_gamma,
    eval_comp,
    eval_erased,
    semantic_fails,
)
from strictness.program import build_env, check_program, lower
from strictness.syntax import parse_program, show_terminal

Y = VarId("y")


def setup(src, lang="cbpv", mode=Mode.BASE):
    low = lower(check_program(parse_program(src, lang, mode)))
    return low, build_env(low)


def test_run_and_effect():
    low, env = setup("var y : unit = ()\nmain = x <- ret thunk{ y; ret () } in z <- force x in ret z")
    out = eval_comp(env, low.main, low.mode)
    assert isinstance(out, Success)
    assert isinstance(out.terminal, TRet) and isinstance(out.terminal.w, WUnit)
    assert out.effect == low.judgment.effect
    assert out.effect[Y] is Attr.S


def test_strict_variable_dropped_fails():
    low, env = setup("var y : unit = ()\nmain = y; ret ()")
    out = eval_comp(drop_binding(env, Y), low.main, low.mode)
    assert out == FailMissing(Y)
    assert semantic_fails(drop_binding(env, Y), low.main, low.mode, validate=True)


def test_lazy_variable_dropped_succeeds():
    low, env = setup("var y : unit = ()\nmain = ret thunk{ y; ret () }")
    assert low.judgment.effect[Y] is Attr.L
    full = eval_comp(env, low.main, low.mode)
    part = eval_comp(drop_binding(env, Y), low.main, low.mode)
    assert isinstance(part, Success)
    assert eq_mod_gamma(full.terminal, part.terminal, ignore={Y})
    assert not eq_mod_gamma(full.terminal, part.terminal)


def test_forcing_the_thunk_later_fails():
    low, env = setup("var y : unit = ()\nmain = t <- ret thunk{ y; ret () } in force t")
    assert isinstance(eval_erased(drop_binding(env, Y), low.main), FailMissing)


def test_eq_mod_gamma_ignores_vectors():
    scope = (Y,)
    body = parse_program("var y : unit = ()\nmain = ret y", "cbpv").main
    a = WThunk(AttrVec(scope, (Attr.S,)), None, body)
    b = WThunk(AttrVec(scope, (Attr.Q,)), None, body)
    assert eq_mod_gamma(a, b)
    assert a != b


def test_closure_application():
    low, env = setup("var y : unit = ()\nmain = fn x : unit . x; ret y")
    out = eval_comp(env, low.main, low.mode)
    assert isinstance(out.terminal, TLam)
    res = apply_closure(out.terminal, WUnit(), low.mode)
    assert isinstance(res, Success) and isinstance(res.terminal, TRet)


def test_cbn_program_runs_through_translation():
    low, env = setup("var z : Bool = true\nmain = let (a, b) = (z, false) in a", "cbn")
    out = eval_comp(env, low.main, low.mode)
    assert isinstance(out, Success)
    assert show_terminal(out.terminal, low.mode) == "ret (inl thunk{ ret () })"


def test_failing_declaration_is_missing():
    low = lower(check_program(parse_program("var y : unit\nmain = ret ()", "cbpv")))
    env = build_env(low)
    assert env.is_missing(Y)


def test_fuel():
    low, env = setup("var y : unit = ()\nmain = x <- ret y in y; x; ret ()")
    with pytest.raises(FuelExhausted):
        eval_comp(env, low.main, low.mode, fuel=2)


def _brute_force(env, m, mode, nodes):
    import itertools

    from strictness.evaluation import candidate_vectors, restamp

    pools = [candidate_vectors(t, mode) for t in nodes]
    return any(isinstance(eval_comp(env, restamp(m, list(c)), mode), Success) for c in itertools.product(*pools))


@pytest.mark.parametrize("mode", list(Mode))
def test_lazy_choice_search_matches_brute_force(mode):
    from strictness.evaluation import _any_choice_succeeds, candidate_vectors, choice_nodes
    from strictness.metatheory import GenConfig, programs

    compared = 0
    for p in programs("cbpv", GenConfig(seed=8, max_depth=5, max_scope=2, mode=mode, returner=True), 80):
        low = lower(check_program(p))
        nodes = choice_nodes(low.main)
        if not 1 <= len(nodes) <= 2:
            continue
        pools = [candidate_vectors(t, mode) for t in nodes]
        envs = [build_env(low)] + [build_env(low, missing={x}) for x in low.ctx.scope]
        for env in envs:
            lazy = _any_choice_succeeds(env, low.main, mode, nodes, pools, 10**6)
            assert lazy == _brute_force(env, low.main, mode, nodes)
            compared += 1
    assert compared >= 20


def test_eval_module_name():
    from strictness import eval as ev
    from strictness import evaluation

    assert ev.semantic_fails is evaluation.semantic_fails
    assert set(ev.__all__) == set(evaluation.__all__)
