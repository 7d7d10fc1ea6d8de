import numpy as np
import pytest
from hypothesis import given, strategies as st

from bulkca.core import CAError, PeriodicConfig, iterate, step, step_words
from bulkca.transform import (
    TRIVIAL,
    Transform,
    apply_transform,
    grouping,
    normalize_composition,
    pack,
    unpack,
)
from bulkca.zoo import additive, delta_max, elementary, identity, shift

from conftest import ref_iterate, ref_pack, ref_shift, ref_unpack, words, REFERENCE_RULES


def all_configs(n, max_period):
    for L in range(1, max_period + 1):
        for w in words(n, L):
            yield PeriodicConfig(n, w)


def test_transform_literal_round_trip():
    for text in ["1:1:0", "~2:3:-1", "3:1:2"]:
        assert str(Transform.parse(text)) == text
    assert Transform.parse("~2:3:-1") == Transform(2, -1, 3, -1)
    with pytest.raises(CAError):
        Transform.parse("2:3")
    with pytest.raises(CAError):
        Transform(0, 1, 1, 0)
    with pytest.raises(CAError):
        Transform(1, 2, 1, 0)


def test_pack_examples():
    c = PeriodicConfig.of(2, "0110")
    assert pack(c, 2).word == (1, 2)
    assert pack(c, 2).states == 4
    assert pack(c, 1) == c
    # period 3 replicated to 6 before packing by 2
    assert pack(PeriodicConfig.of(2, "011"), 2).word == ref_pack((0, 1, 1), 2, 2)


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("tau", [1, -1])
def test_pack_unpack_round_trip(m, tau):
    for c in all_configs(2, 6):
        p = pack(c, m, tau)
        assert p.word == ref_pack(c.word, 2, m, tau)
        assert unpack(p, m, tau) == c


def test_unpack_needs_a_power():
    with pytest.raises(CAError):
        unpack(PeriodicConfig(5, (0, 1)), 2)


def test_ref_unpack_inverts_ref_pack():
    for w in words(3, 4):
        assert ref_unpack(ref_pack(w, 3, 2, -1), 3, 2, -1) == w


def extensionally_equal(a, b, max_period=4):
    return all(step(a, c) == step(b, c) for c in all_configs(a.states, max_period))


def test_apply_transform_examples():
    z2 = additive(2)
    assert extensionally_equal(apply_transform(z2, TRIVIAL), z2)
    assert extensionally_equal(apply_transform(shift(2, 1), Transform(1, 1, 2, 0)), shift(2, 2))
    four = apply_transform(shift(2, 1), Transform(2, 1, 2, 0))
    assert four.states == 4
    assert extensionally_equal(four, shift(4, 1))


@pytest.mark.parametrize("alpha", ["1:1:1", "2:1:0", "2:2:-1", "3:2:2", "~1:1:0", "~2:3:1", "~3:1:-2"])
@pytest.mark.parametrize("name", ["z2", "max2", "eca30", "shift2", "z3"])
def test_conjugacy_against_reference(alpha, name):
    n, r, rule = REFERENCE_RULES[name]
    from bulkca.zoo import ZOO_SMALL

    a = ZOO_SMALL[name]()
    t = Transform.parse(alpha)
    b = apply_transform(a, t)
    assert b.states == n**t.m
    for L in range(1, 5):
        for w in words(n, L):
            expected = ref_pack(ref_shift(ref_iterate(rule, r, w, t.T), t.s), n, t.m, t.tau)
            got = step(b, PeriodicConfig(b.states, ref_pack(w, n, t.m, t.tau)))
            assert got == PeriodicConfig(b.states, expected), (alpha, name, w)


def test_mirror_is_involution():
    mir = Transform(1, -1, 1, 0)
    for a in (additive(2), shift(2, 1), elementary(30), delta_max(3)):
        twice = apply_transform(apply_transform(a, mir), mir)
        assert extensionally_equal(twice, a)
    # a single mirror turns a right shift into a left one
    assert extensionally_equal(apply_transform(shift(2, 1), mir), shift(2, -1))


def test_result_radius_covers_cone():
    t = Transform(2, 1, 3, 1)
    b = apply_transform(additive(2), t)
    # cone of 3 steps radius 1 shifted by 1, packed by 2
    assert b.radius >= 2


def test_grouping_examples():
    z2 = additive(2)
    assert extensionally_equal(grouping(z2, 1), z2)
    assert extensionally_equal(grouping(identity(2), 2), identity(4))
    g = grouping(z2, 2)
    for c in all_configs(2, 6):
        assert step(g, pack(c, 2)) == pack(iterate(z2, c, 2), 2)
    with pytest.raises(CAError):
        grouping(z2, 0)


def _replay_normalization(F, alpha, max_period=4):
    norm = normalize_composition(alpha)
    bb = apply_transform(apply_transform(F, alpha), norm.beta)
    g = grouping(F, norm.t)
    assert bb.states == g.states
    for L in range(1, max_period + 1):
        ws = np.array(list(words(g.states, L)), dtype=np.int64)
        if len(ws) > 4096:
            ws = ws[np.random.default_rng(L).choice(len(ws), 4096, replace=False)]
        lhs = step_words(g, ws)
        rhs = norm.relabel_words(step_words(bb, norm.relabel_words(ws, F.states)), F.states)
        assert (lhs == rhs).all(), (alpha, L)
    return norm


def test_normalize_examples():
    norm = normalize_composition(TRIVIAL)
    assert norm.t == 1 and norm.beta == TRIVIAL
    norm = _replay_normalization(additive(2), Transform(2, 1, 2, 0))
    assert norm.t == 2
    _replay_normalization(shift(2, 1), Transform(1, 1, 2, 1))


@given(
    st.integers(1, 2), st.sampled_from([1, -1]), st.integers(1, 2), st.integers(-2, 2),
    st.sampled_from(["z2", "eca30", "shift2", "max2", "eca110"]),
)
def test_normalization_property(m, tau, T, s, name):
    from bulkca.zoo import ZOO_SMALL

    _replay_normalization(ZOO_SMALL[name](), Transform(m, tau, T, s), max_period=3)


def test_relabel_is_an_involution():
    norm = normalize_composition(Transform(2, -1, 3, 0))
    assert norm.t == 6 and norm.sub_block == 2
    for x in range(64):
        assert norm.relabel(norm.relabel(x, 2), 2) == x
    norm = normalize_composition(Transform(2, -1, 1, 0))
    assert [norm.relabel(x, 2) for x in range(4)] == [0, 2, 1, 3]


@pytest.mark.parametrize("m,T,s,t", [(1, 1, 0, 1), (2, 2, 0, 2), (2, 1, 1, 2), (3, 2, 0, 6), (2, 4, 1, 8), (1, 1, 5, 1)])
def test_normalization_is_least(m, T, s, t):
    assert normalize_composition(Transform(m, 1, T, s)).t == t
