import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bulkca.core import (
    Automaton,
    CAError,
    PeriodicConfig,
    StateCountMismatch,
    TableTooLarge,
    TuringMachine,
    canonicalize_radius,
    iterate,
    minimal_neighborhood,
    mirror,
    orbit_cycle,
    power,
    product,
    sample_neighborhood,
    step,
    step_words,
)
from bulkca.zoo import additive, identity, random_rule, shift

from conftest import REFERENCE_RULES, cfg, ref_iterate, ref_step, words


def all_configs(n, max_period):
    for L in range(1, max_period + 1):
        for w in words(n, L):
            yield PeriodicConfig(n, w)


# -- representation -------------------------------------------------------------


def test_table_validation():
    with pytest.raises(CAError):
        Automaton(2, 1, table=[0] * 7)
    with pytest.raises(CAError):
        Automaton(2, 0, table=[0, 2])
    with pytest.raises(CAError):
        Automaton(0, 0, table=[])
    with pytest.raises(CAError):
        Automaton(2, 0)


def test_window_index_leftmost_most_significant():
    # f(x, y, z) = x: the table is 0 for indices < 4 and 1 above
    a = Automaton(2, 1, table=[0, 0, 0, 0, 1, 1, 1, 1])
    assert a(1, 0, 0) == 1 and a(0, 1, 1) == 0


@pytest.mark.parametrize("name", sorted(REFERENCE_RULES))
def test_zoo_tables_match_reference(name, small_zoo):
    n, r, rule = REFERENCE_RULES[name]
    a = small_zoo[name]
    assert (a.states, a.radius) == (n, r)
    for w in itertools.product(range(n), repeat=2 * r + 1):
        assert a(*w) == rule(*w), (name, w)


def test_lazy_and_materialized_agree():
    rng = np.random.default_rng(3)
    a = random_rule(3, 1, rng)
    lazy = Automaton.lazy(3, 1, lambda w: a.evaluate(w))
    W = rng.integers(0, 3, size=(500, 3))
    assert (lazy.evaluate(W) == a.evaluate(W)).all()
    assert (lazy.materialize().table == a.table).all()


# -- configurations --------------------------------------------------------------


def test_config_equality_uses_primitive_period_not_rotation():
    assert cfg(2, "0101") == cfg(2, "01")
    assert cfg(2, "01") != cfg(2, "10")
    assert hash(cfg(2, "0101")) == hash(cfg(2, "01"))


def test_config_parse_and_validation():
    c = PeriodicConfig.parse("3 : 0 1 2", 3)
    assert c.word == (0, 1, 2)
    with pytest.raises(CAError):
        PeriodicConfig.parse("2 : 0 1 0", 2)
    with pytest.raises(CAError):
        PeriodicConfig.of(2, "012")
    with pytest.raises(CAError):
        PeriodicConfig(2, ())


# -- step / iterate ------------------------------------------------------------------


def test_step_examples():
    assert step(identity(2), cfg(2, "0110")) == cfg(2, "0110")
    z2 = additive(2)
    assert step(z2, cfg(2, "000")) == cfg(2, "000")
    assert step(z2, cfg(2, "110")).word == (0, 0, 0)


def test_step_state_mismatch():
    with pytest.raises(StateCountMismatch):
        step(additive(3), cfg(2, "01"))


def test_iterate_examples():
    z2 = additive(2)
    c = cfg(2, "0001")
    assert iterate(z2, c, 0) == c
    assert iterate(shift(2, 1), cfg(2, "01"), 2) == cfg(2, "01")
    manual = c
    for _ in range(4):
        manual = step(z2, manual)
    assert iterate(z2, c, 4) == manual


@pytest.mark.parametrize("name", sorted(REFERENCE_RULES))
def test_step_matches_reference_oracle(name, small_zoo):
    n, r, rule = REFERENCE_RULES[name]
    a = small_zoo[name]
    for L in range(1, 6):
        ws = np.array(list(words(n, L)), dtype=np.int64)
        got = step_words(a, ws)
        for w, g in zip(ws.tolist(), got.tolist()):
            assert tuple(g) == ref_step(rule, r, tuple(w))


@given(st.integers(2, 3), st.lists(st.integers(0, 2), min_size=1, max_size=8), st.integers(0, 7))
def test_step_commutes_with_rotation(n, word, k):
    word = [x % n for x in word]
    a = additive(n)
    c = PeriodicConfig(n, word)
    assert step(a, c.rotate(k)) == step(a, c).rotate(k)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=6), st.integers(1, 4), st.integers(0, 255))
def test_step_commutes_with_replication(word, m, code):
    from bulkca.zoo import elementary

    a = elementary(code)
    c = PeriodicConfig(2, word)
    assert step(a, c.replicate(m)).word == step(a, c).word * m


# -- power / product / canonical radius -----------------------------------------------


def test_power_examples():
    for c in all_configs(2, 4):
        assert step(power(identity(2), 5), c) == c
        assert step(power(shift(2, 1), 2), c) == step(shift(2, 2), c)
    z2 = additive(2)
    c = cfg(2, "00010")
    assert step(power(z2, 2), c) == iterate(z2, c, 2)
    assert power(z2, 3).radius == 3


def test_power_lazy_beyond_threshold():
    p = power(additive(3), 8)
    assert not p.materializable
    c = cfg(3, "0120012")
    assert step(p, c) == iterate(additive(3), c, 8)


@pytest.mark.parametrize("name", ["z2", "z3", "max3", "eca30", "shift3"])
def test_power_composition(name, small_zoo):
    a = small_zoo[name]
    for s_, t_ in [(1, 1), (1, 2), (2, 1), (3, 3), (2, 3)]:
        added = power(a, s_ + t_)
        nested = power(canonicalize_radius(power(a, s_), s_ * a.radius), t_)
        multiplied = power(a, s_ * t_)
        for c in all_configs(a.states, 4):
            assert step(added, c) == step(power(a, t_), step(power(a, s_), c))
            assert step(nested, c) == step(multiplied, c)


def test_product_examples():
    p = product(identity(2), identity(2))
    assert p.states == 4
    for c in all_configs(4, 3):
        assert step(p, c) == c
    sp = product(shift(2, 1), shift(2, -1))
    # (0,1)(1,0) encoded as 0*2+1, 1*2+0
    out = step(sp, PeriodicConfig(4, (1, 2, 0)))
    first = [x // 2 for x in out.word]
    second = [x % 2 for x in out.word]
    assert first == list(ref_step(lambda x, y, z: x, 1, (0, 1, 0)))
    assert second == list(ref_step(lambda x, y, z: z, 1, (1, 0, 0)))


def test_product_projection():
    a, b = additive(2), identity(2)
    p = product(a, b)
    for c in all_configs(4, 4):
        out = step(p, c)
        proj = PeriodicConfig(2, [x // 2 for x in c.word])
        assert [x // 2 for x in out.word] == list(step(a, proj).word) * (len(out) // len(step(a, proj)))


def test_canonicalize_radius():
    a = canonicalize_radius(identity(2), 1)
    assert a.radius == 1
    for c in all_configs(2, 4):
        assert step(a, c) == c
    z2 = additive(2)
    assert canonicalize_radius(z2, 1) is z2 or (canonicalize_radius(z2, 1).table == z2.table).all()
    wide = canonicalize_radius(z2, 2)
    c = cfg(2, "00010")
    for t in range(4):
        assert iterate(wide, c, t) == iterate(z2, c, t)
    with pytest.raises(CAError):
        canonicalize_radius(z2, 0)


@pytest.mark.parametrize("name", sorted(REFERENCE_RULES))
def test_canonicalize_radius_keeps_orbits(name, small_zoo):
    a = small_zoo[name]
    wide = canonicalize_radius(a, a.radius + 1)
    for c in all_configs(a.states, 4):
        assert step(wide, c) == step(a, c)


def test_mirror_reverses_rule():
    m = mirror(shift(2, 1))
    for c in all_configs(2, 4):
        assert step(m, c) == step(shift(2, -1), c)


# -- orbits and neighborhoods ---------------------------------------------------------


def test_orbit_cycle_examples():
    oc = orbit_cycle(identity(2), cfg(2, "0110"), 5)
    assert (oc.preperiod, oc.period) == (0, 1)
    oc = orbit_cycle(shift(2, 1), cfg(2, "01"), 5)
    assert (oc.preperiod, oc.period) == (0, 2)
    oc = orbit_cycle(additive(2), cfg(2, "110"), 5)
    assert (oc.preperiod, oc.period) == (1, 1)
    assert orbit_cycle(shift(2, 1), cfg(2, "0001"), 2) is None


@given(st.lists(st.integers(0, 1), min_size=1, max_size=6), st.integers(0, 255))
def test_orbit_cycle_is_least(word, code):
    from bulkca.zoo import elementary

    a = elementary(code)
    c = PeriodicConfig(2, word)
    oc = orbit_cycle(a, c, 2 ** len(word) + 1)
    assert oc is not None
    seen = [iterate(a, c, t) for t in range(oc.preperiod + oc.period + 1)]
    assert seen[oc.preperiod + oc.period] == seen[oc.preperiod]
    assert len(set(seen[:oc.preperiod + oc.period])) == oc.preperiod + oc.period


def test_minimal_neighborhood_examples():
    assert minimal_neighborhood(canonicalize_radius(identity(2), 1)) == {0}
    assert minimal_neighborhood(shift(2, 1)) == {-1}
    assert minimal_neighborhood(shift(2, -1)) == {1}
    assert minimal_neighborhood(additive(2)) == {-1, 0, 1}


def test_minimal_neighborhood_too_large():
    big = power(additive(3), 8)
    with pytest.raises(TableTooLarge):
        minimal_neighborhood(big)
    assert sample_neighborhood(power(additive(2), 3)) <= {-3, -2, -1, 0, 1, 2, 3}


def test_minimal_neighborhood_matches_pair_scan():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a = random_rule(2, 1, rng)
        expected = set()
        for w in itertools.product((0, 1), repeat=3):
            for i in range(3):
                v = list(w)
                v[i] ^= 1
                if a(*w) != a(*v):
                    expected.add(i - 1)
        assert minimal_neighborhood(a) == expected


def test_turing_machine_validation():
    with pytest.raises(CAError):
        TuringMachine(1, 2, 0, {(0, 0): (0, 0, 0)})
    with pytest.raises(CAError):
        TuringMachine(1, 1, 0, {(0, 0): (0, 0, 2)})


def test_reference_iterate_agrees():
    n, r, rule = REFERENCE_RULES["eca110"]
    from bulkca.zoo import elementary

    c = cfg(2, "0001011")
    assert iterate(elementary(110), c, 5).word == ref_iterate(rule, r, c.word, 5)
