import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from strictness.attrs import (
    Attr,
    AttrVec,
    Mode,
    VarId,
    all_vectors,
    attr_lazify,
    attr_leq,
    attr_plus,
    default_attr,
    legal_attrs,
    parse_vec,
    vec_downshift,
    vec_lazify,
    vec_leq,
    vec_plus,
    vec_restrict,
)
from strictness.errors import IllegalAttribute, ScopeMismatch

S, L, Q, U = Attr.S, Attr.L, Attr.Q, Attr.U

# rows are the left operand, columns the right, in the order S ? L
PLUS_ROWS = {
    S: (S, S, S),
    Q: (S, Q, Q),
    L: (S, Q, L),
}
COLS = (S, Q, L)

# Hasse diagrams: (lower, upper) edges
BASE_EDGES = {(Q, L), (Q, S)}
EXTENDED_EDGES = BASE_EDGES | {(L, U)}


def closure(edges, attrs):
    leq = {(a, a) for a in attrs} | set(edges)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(leq), repeat=2):
            if b == c and (a, d) not in leq:
                leq.add((a, d))
                changed = True
    return leq


def test_base_plus_table():
    seen = 0
    for a, row in PLUS_ROWS.items():
        for b, want in zip(COLS, row):
            assert attr_plus(a, b, Mode.BASE) is want
            seen += 1
    assert seen == 9


def test_extended_plus_agrees_on_old_attrs_and_u_is_identity():
    for a, row in PLUS_ROWS.items():
        for b, want in zip(COLS, row):
            assert attr_plus(a, b, Mode.EXTENDED) is want
    for a in legal_attrs(Mode.EXTENDED):
        assert attr_plus(U, a, Mode.EXTENDED) is a
        assert attr_plus(a, U, Mode.EXTENDED) is a


@pytest.mark.parametrize("mode,edges", [(Mode.BASE, BASE_EDGES), (Mode.EXTENDED, EXTENDED_EDGES)])
def test_order_matches_semilattice(mode, edges):
    attrs = legal_attrs(mode)
    want = closure(edges, attrs)
    for a, b in itertools.product(attrs, repeat=2):
        assert attr_leq(a, b, mode) == ((a, b) in want), (a, b)


@pytest.mark.parametrize("mode", list(Mode))
def test_identity_is_default(mode):
    d = default_attr(mode)
    for a in legal_attrs(mode):
        assert attr_plus(d, a, mode) is a


@pytest.mark.parametrize("mode", list(Mode))
def test_monoid_laws_and_monotonicity(mode):
    attrs = legal_attrs(mode)
    for a, b, c in itertools.product(attrs, repeat=3):
        assert attr_plus(attr_plus(a, b, mode), c, mode) is attr_plus(a, attr_plus(b, c, mode), mode)
        assert attr_plus(a, b, mode) is attr_plus(b, a, mode)
        if attr_leq(a, b, mode):
            assert attr_leq(attr_plus(a, c, mode), attr_plus(b, c, mode), mode)


def test_lazify():
    assert [attr_lazify(a, Mode.BASE) for a in (S, L, Q)] == [L, L, L]
    assert [attr_lazify(a, Mode.EXTENDED) for a in (S, L, Q, U)] == [L, L, L, U]


def test_u_illegal_in_base():
    with pytest.raises(IllegalAttribute):
        attr_plus(U, S, Mode.BASE)
    with pytest.raises(IllegalAttribute):
        attr_leq(L, U, Mode.BASE)
    with pytest.raises(IllegalAttribute):
        AttrVec.of((VarId("x"),), {VarId("x"): U}, Mode.BASE)


XYZ = tuple(VarId(n) for n in "xyz")
modes = st.sampled_from(list(Mode))


@st.composite
def vec_pair(draw):
    mode = draw(modes)
    pick = st.sampled_from(legal_attrs(mode))
    g1 = AttrVec(XYZ, tuple(draw(pick) for _ in XYZ))
    g2 = AttrVec(XYZ, tuple(draw(pick) for _ in XYZ))
    return mode, g1, g2


@given(vec_pair())
def test_vector_ops_are_pointwise(args):
    mode, g1, g2 = args
    s = vec_plus(g1, g2, mode)
    for x in XYZ:
        assert s[x] is attr_plus(g1[x], g2[x], mode)
    assert vec_leq(g1, g2, mode) == all(attr_leq(g1[x], g2[x], mode) for x in XYZ)
    assert vec_lazify(g1, mode) == AttrVec(XYZ, tuple(attr_lazify(a, mode) for a in g1.attrs))


@given(vec_pair())
def test_render_parse_round_trip(args):
    mode, g, _ = args
    text = g.render(mode)
    assert parse_vec(text, XYZ, mode) == g
    assert f":{default_attr(mode)}" not in text


@given(vec_pair())
def test_downshift_and_restrict(args):
    mode, g, _ = args
    d = vec_downshift(g, VarId("y"))
    assert d.scope == (VarId("x"), VarId("z"))
    assert d[VarId("z")] is g[VarId("z")]
    wide = vec_restrict(g, XYZ + (VarId("w"),), mode)
    assert wide[VarId("w")] is default_attr(mode)
    assert vec_restrict(wide, XYZ, mode) == g


def test_scope_mismatch():
    g = AttrVec.default(XYZ, Mode.BASE)
    with pytest.raises(ScopeMismatch):
        vec_plus(g, AttrVec.default(XYZ[:2], Mode.BASE), Mode.BASE)
    with pytest.raises(ScopeMismatch):
        AttrVec.of(XYZ, {VarId("w"): S}, Mode.BASE)


def test_all_vectors_counts():
    assert len(list(all_vectors(XYZ[:2], Mode.BASE))) == 9
    assert len(list(all_vectors(XYZ[:2], Mode.EXTENDED))) == 16
