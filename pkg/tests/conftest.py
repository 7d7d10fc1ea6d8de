"""Shared pure-Python oracles, written independently of the numpy code paths."""
from __future__ import annotations

import itertools
import math
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from bulkca.core import Automaton, PeriodicConfig
from bulkca import zoo

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

GOLDEN = Path(__file__).parent / "golden"


def _eca(code):
    return lambda x, y, z: (code >> (4 * x + 2 * y + z)) & 1


# (states, radius, local rule) written from the definitions, for every small zoo entry
REFERENCE_RULES = {
    "identity2": (2, 0, lambda y: y),
    "shift2": (2, 1, lambda x, y, z: x),
    "shift2m": (2, 1, lambda x, y, z: z),
    "z2": (2, 1, lambda x, y, z: (x + y + z) % 2),
    "z3": (3, 1, lambda x, y, z: (x + y + z) % 3),
    "max2": (2, 1, lambda x, y, z: max(x, y, z)),
    "max3": (3, 1, lambda x, y, z: max(x, y, z)),
    "const2": (2, 0, lambda y: 0),
    "identity3": (3, 0, lambda y: y),
    "shift3": (3, 1, lambda x, y, z: x),
    "eca30": (2, 1, _eca(30)),
    "eca110": (2, 1, _eca(110)),
}


def ref_step(rule, r, word):
    """One step of a local rule on a cyclic word."""
    L = len(word)
    return tuple(rule(*(word[(z + o) % L] for o in range(-r, r + 1))) for z in range(L))


def ref_iterate(rule, r, word, t):
    for _ in range(t):
        word = ref_step(rule, r, word)
    return tuple(word)


def automaton_rule(a: Automaton):
    """The local rule of ``a`` as a Python callable (through single-window calls)."""
    return lambda *cells: a(*cells)


def words(n, L):
    return itertools.product(range(n), repeat=L)


def ref_pack(word, n, m, tau=1):
    """Replicate to a multiple of ``m``, mirror (x_z -> x_{-z}) when ``tau`` is -1, group."""
    L = len(word)
    word = tuple(word) * (math.lcm(L, m) // L)
    if tau < 0:
        word = tuple(word[(-z) % len(word)] for z in range(len(word)))
    out = []
    for i in range(0, len(word), m):
        v = 0
        for x in word[i:i + m]:
            v = v * n + x
        out.append(v)
    return tuple(out)


def ref_unpack(word, n, m, tau=1):
    cells = []
    for v in word:
        block = []
        for _ in range(m):
            block.append(v % n)
            v //= n
        cells.extend(reversed(block))
    if tau < 0:
        cells = [cells[(-z) % len(cells)] for z in range(len(cells))]
    return tuple(cells)


def ref_shift(word, s):
    """``x_z -> x_{z-s}`` on a cyclic word."""
    L = len(word)
    return tuple(word[(z - s) % L] for z in range(L))


def brute_commutes(a: Automaton, b: Automaton, h, max_period=4):
    """Global check: ``h(step_a(c)) == step_b(h(c))`` for every ``a``-config of period <= max_period."""
    ra, rb = automaton_rule(a), automaton_rule(b)
    for L in range(1, max_period + 1):
        for w in words(a.states, L):
            lhs = tuple(h[x] for x in ref_step(ra, a.radius, w))
            rhs = ref_step(rb, b.radius, tuple(h[x] for x in w))
            if lhs != rhs:
                return False
    return True


def brute_quotient(a: Automaton, b: Automaton, pi, max_period=4):
    """``pi(step_b(c)) == step_a(pi(c))`` for every ``b``-config of period <= max_period."""
    ra, rb = automaton_rule(a), automaton_rule(b)
    for L in range(1, max_period + 1):
        for w in words(b.states, L):
            lhs = tuple(pi[x] for x in ref_step(rb, b.radius, w))
            rhs = ref_step(ra, a.radius, tuple(pi[x] for x in w))
            if lhs != rhs:
                return False
    return True


def cfg(n, text):
    return PeriodicConfig.of(n, text)


@pytest.fixture(scope="session")
def small_zoo():
    return {name: make() for name, make in zoo.ZOO_SMALL.items()}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: one numbered acceptance criterion")



# one line per acceptance criterion, collected for the terminal summary
ACCEPTANCE_LINES: dict = {}


def record_criterion(key, ok: bool, detail: str = "") -> None:
    line = f"criterion {key}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
    ACCEPTANCE_LINES[key] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")

    def order(key):
        head = str(key).split()[0]
        return (int(head) if head.isdigit() else 99, str(key))

    for key in sorted(ACCEPTANCE_LINES, key=order):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
