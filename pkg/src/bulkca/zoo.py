"""Constructors for the named automata and gadgets used throughout the package."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import Automaton, CAError, PeriodicConfig, TuringMachine, product


# -- elementary families -------------------------------------------------------


def additive(p: int) -> Automaton:
    """``x + y + z mod p`` on radius 1."""
    if p < 2:
        raise CAError("additive rule needs p >= 2")
    return Automaton.from_function(p, 1, lambda x, y, z: (x + y + z) % p, label=f"Z{p}")


def shift(n: int, z: int) -> Automaton:
    """Translation ``c'_k = c_{k - z}``; the rule reads offset ``-z``."""
    if n < 1:
        raise CAError("state count must be positive")
    r = abs(z)
    # reading offset -z means the cell at window position r - z
    width = 2 * r + 1
    idx = np.arange(n**width)
    digit = width - 1 - (r - z)
    table = (idx // n**digit) % n
    label = f"id{n}" if z == 0 else f"shift{n}[{z}]"
    return Automaton(n, r, table=table, label=label)


def identity(n: int) -> Automaton:
    return shift(n, 0)


def delta_max(n: int = 2) -> Automaton:
    return Automaton.from_function(n, 1, lambda x, y, z: max(x, y, z), label=f"max{n}")


def constant(n: int = 2, q: int = 0) -> Automaton:
    if not 0 <= q < n:
        raise CAError("constant state out of range")
    return Automaton(n, 0, table=[q] * n, label=f"const{n}[{q}]")


def bottom() -> Automaton:
    """The single-state automaton."""
    return Automaton(1, 0, table=[0], label="bottom")


def elementary(code: int) -> Automaton:
    """Wolfram-numbered 2-state radius-1 rule."""
    if not 0 <= code < 256:
        raise CAError("elementary rule number must be in 0..255")
    table = [(code >> i) & 1 for i in range(8)]
    return Automaton(2, 1, table=table, label=f"ECA{code}")


def random_rule(n: int, r: int, rng: np.random.Generator) -> Automaton:
    return Automaton(n, r, table=rng.integers(0, n, size=n ** (2 * r + 1)), label="random")


# -- shift products ------------------------------------------------------------


@dataclass(frozen=True)
class ShiftProduct:
    """Product of translations; factors with equal vectors are merged."""

    factors: tuple

    def __post_init__(self):
        merged: dict = {}
        for n, z in self.factors:
            n, z = int(n), int(z)
            if n < 2:
                raise CAError("every factor needs at least two states")
            merged[z] = merged.get(z, 1) * n
        if not merged:
            raise CAError("a shift product needs at least one factor")
        object.__setattr__(self, "factors", tuple((merged[z], z) for z in merged))

    @classmethod
    def binary(cls, vectors: Sequence[int]) -> "ShiftProduct":
        return cls(tuple((2, z) for z in vectors))

    @property
    def vectors(self) -> tuple:
        return tuple(z for _, z in self.factors)

    def __str__(self) -> str:
        return " x ".join(f"shift{n}[{z}]" for n, z in self.factors)


def shift_product(sp: ShiftProduct) -> Automaton:
    """Product automaton, first factor most significant."""
    out = None
    for n, z in sp.factors:
        out = shift(n, z) if out is None else product(out, shift(n, z))
    out.label = str(sp)
    out.meta["shiftprod"] = sp
    return out


def characteristic_sequence(sp: ShiftProduct) -> tuple:
    """Ratios ``(z_k - z_1) / (z_2 - z_1)`` for ``k >= 3`` over the sorted vectors."""
    z = sorted(sp.vectors)
    if len(z) < 3:
        raise CAError("the characteristic sequence needs at least three distinct vectors")
    return tuple(Fraction(zk - z[0], z[1] - z[0]) for zk in z[2:])


def shift_product_level(sp: ShiftProduct) -> int:
    return len(set(sp.vectors))


# -- gadgets -------------------------------------------------------------------

ALPHA, A0, A1, B0, B1 = 0, 1, 2, 3, 4


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, math.isqrt(p) + 1))


def nontransitivity_gadget(p: int = 5) -> tuple:
    """The prime gadget ``A`` (radius 1, ``p`` states) and the 2-state identity."""
    if p < 5 or not _is_prime(p):
        raise CAError("the gadget needs a prime p >= 5")

    def f(_, x, y):
        if x != ALPHA and y in (A0, A1):
            return A1 if y == A0 else A0
        if x != ALPHA and y in (B0, B1):
            return B1 if y == B0 else B0
        return (y + 1) % p

    return Automaton.from_function(p, 1, f, label=f"gadget{p}"), identity(2)


def gadget_quotient() -> Automaton:
    """The 2-state image of the gadget restricted to ``{a0, a1, b0, b1}``.

    The gadget rule reads the centre and right cells, and on that subset the
    centre only gates the flip inside each pair, so collapsing each pair
    leaves the translation reading the right neighbour.
    """
    return shift(2, -1)


def parity_range_pair() -> tuple:
    """``(Big, Small)``: 3-state and 2-state radius-2 rules with Small a quotient of Big."""

    def big(x, y, z, t, u):
        w = "".join("0" if c == 0 else "1" for c in (x, y, z, t, u))
        if w == "01110":
            return 1
        if w[1:] == "0110":
            return 2
        if w[1:4] in ("111", "010"):
            return z
        return 0

    def small(x, y, z, t, u):
        w = f"{x}{y}{z}{t}{u}"
        return int(w[1:4] in ("111", "010") or w[1:] == "0110")

    return (
        Automaton.from_function(3, 2, big, label="Big"),
        Automaton.from_function(2, 2, small, label="Small"),
    )


# -- Turing machine embedding --------------------------------------------------

LEFT, RIGHT = 0, 1


@dataclass(frozen=True)
class TMLayout:
    """State numbering of the embedding.

    Arrow cells are ``2 g + d`` (``d = 0`` points left, ``d = 1`` right),
    head cells ``2 |G| + g |Q| + q`` and the error state is last.
    """

    states: int
    symbols: int

    @property
    def kappa(self) -> int:
        return 2 * self.symbols + self.symbols * self.states

    @property
    def size(self) -> int:
        return self.kappa + 1

    def arrow(self, g: int, d: int) -> int:
        return 2 * g + d

    def head(self, g: int, q: int) -> int:
        return 2 * self.symbols + g * self.states + q

    def decode(self, x: int):
        """``(symbol, head state or None)``; ``None`` for the error state."""
        if x == self.kappa:
            return None
        if x < 2 * self.symbols:
            return (x // 2, None)
        g, q = divmod(x - 2 * self.symbols, self.states)
        return (g, q)


def tm_embed(tm: TuringMachine) -> Automaton:
    """Radius-1 automaton running ``tm`` on single-head configurations.

    Cells left of the head carry right arrows and cells right of it left
    arrows.  Any adjacent pair breaking this order (two heads, a left arrow
    facing a head or right arrow, ...) produces the error state, which then
    spreads.
    """
    L = TMLayout(tm.states, tm.symbols)
    G2 = 2 * tm.symbols
    K = L.kappa
    n = L.size
    is_head = np.arange(n) >= G2
    is_head[K] = False
    is_left = (np.arange(n) < G2) & (np.arange(n) % 2 == LEFT)
    is_right = (np.arange(n) < G2) & (np.arange(n) % 2 == RIGHT)
    sym = np.where(np.arange(n) < G2, np.arange(n) // 2, (np.arange(n) - G2) // max(tm.states, 1))
    hstate = (np.arange(n) - G2) % max(tm.states, 1)

    nq = np.zeros((tm.symbols, tm.states), dtype=np.int64)
    ng = np.zeros_like(nq)
    mv = np.zeros_like(nq)
    for (q, g), (q2, g2, d) in tm.transition.items():
        nq[g, q], ng[g, q], mv[g, q] = q2, g2, d

    def bad_pair(l, r):
        return (
            (is_left[l] & (is_head[r] | is_right[r]))
            | (is_right[r] & (is_head[l] | is_left[l]))
            | (is_head[l] & is_head[r])
        )

    def func(windows):
        x, y, z = windows[:, 0], windows[:, 1], windows[:, 2]
        out = y.copy()
        hy = is_head[y]
        gy, qy = sym[y], hstate[y]
        # head cell
        d = np.where(hy, mv[gy * hy, qy * hy], 0)
        g2 = ng[gy * hy, qy * hy]
        q2 = nq[gy * hy, qy * hy]
        out = np.where(hy & (d == 0), G2 + g2 * tm.states + q2, out)
        out = np.where(hy & (d == 1), 2 * g2 + RIGHT, out)
        out = np.where(hy & (d == -1), 2 * g2 + LEFT, out)
        # neighbours moving in
        for nb, want in ((x, 1), (z, -1)):
            hn = is_head[nb]
            gn, qn = sym[nb] * hn, hstate[nb] * hn
            comes = hn & (mv[gn, qn] == want) & ~hy
            out = np.where(comes, G2 + sym[y] * tm.states + nq[gn, qn], out)
        err = (x == K) | (y == K) | (z == K) | bad_pair(x, y) | bad_pair(y, z)
        return np.where(err, K, out)

    return Automaton.lazy(n, 1, func, label="tm", meta={"tm_layout": L}).materialize()


def tm_config(tm: TuringMachine, tape: Sequence[int], head: int, state: int) -> PeriodicConfig:
    """Encode a tape (one spatial period) with the head at index ``head``."""
    L = TMLayout(tm.states, tm.symbols)
    word = []
    for i, g in enumerate(tape):
        if i < head:
            word.append(L.arrow(g, RIGHT))
        elif i == head:
            word.append(L.head(g, state))
        else:
            word.append(L.arrow(g, LEFT))
    return PeriodicConfig(L.size, tuple(word))


def tm_decode(tm: TuringMachine, c: PeriodicConfig, lo: int = 0, hi: int | None = None):
    """``(tape, head, state)`` read from cells ``lo..hi``; ``None`` if not a single-head region."""
    L = TMLayout(tm.states, tm.symbols)
    cells = c.word[lo:hi]
    tape, head, state = [], None, None
    for i, x in enumerate(cells):
        dec = L.decode(x)
        if dec is None:
            return None
        g, q = dec
        tape.append(g)
        if q is not None:
            if head is not None:
                return None
            head, state = i, q
    return tape, head, state


def tm_run(tm: TuringMachine, tape: Sequence[int], head: int, state: int, steps: int):
    """Reference simulator on a finite tape (the head must stay inside)."""
    tape = list(tape)
    trace = [(tuple(tape), head, state)]
    for _ in range(steps):
        q2, g2, d = tm.transition[(state, tape[head])]
        tape[head] = g2
        head += d
        state = q2
        if not 0 <= head < len(tape):
            raise CAError("head left the finite tape")
        trace.append((tuple(tape), head, state))
    return trace


def unary_incrementer() -> TuringMachine:
    """Symbols: 0 blank, 1 unary digit, 2 left marker.  Counts up forever."""
    t = {
        (0, 1): (0, 1, 1),
        (0, 0): (1, 1, -1),
        (0, 2): (0, 2, 1),
        (1, 1): (1, 1, -1),
        (1, 2): (0, 2, 1),
        (1, 0): (1, 0, -1),
    }
    return TuringMachine(2, 3, 0, t)


# -- faithful encodings --------------------------------------------------------


def eleven_free_codes(count: int) -> tuple:
    """Least width ``m`` and the first ``count`` 11-free words of that width starting with 0."""
    m = 1
    while True:
        words = [
            w for w in itertools.product((0, 1), repeat=m)
            if w[0] == 0 and all(not (a and b) for a, b in zip(w, w[1:]))
        ]
        if len(words) >= count:
            return m, tuple(words[:count])
        m += 1


class _BlockDecoder:
    """Shared machinery of the two block encodings."""

    def __init__(self, a: Automaton, blocks: np.ndarray, alphabet: int):
        self.a = a
        self.blocks = blocks  # (n_a, w)
        self.w = blocks.shape[1]
        self.alphabet = alphabet
        self.radius = (a.radius + 1) * self.w
        powers = alphabet ** np.arange(self.w - 1, -1, -1, dtype=np.int64)
        self.powers = powers
        keys = blocks @ powers
        size = alphabet**self.w
        self.lookup = np.full(size, -1, dtype=np.int64) if size <= 1 << 24 else None
        self.key_map = {int(k): i for i, k in enumerate(keys)}
        if self.lookup is not None:
            self.lookup[keys] = np.arange(len(keys))

    def _code(self, segs: np.ndarray) -> np.ndarray:
        keys = segs @ self.powers
        if self.lookup is not None:
            return self.lookup[keys]
        return np.array([self.key_map.get(int(k), -1) for k in keys], dtype=np.int64)

    def decode(self, windows: np.ndarray, starts: np.ndarray):
        """For each window and candidate block start (relative offset), decode ``2r+1`` blocks.

        Returns ``(ok, states)`` with ``states`` shape ``(k, 2 r_a + 1)``.
        """
        k = windows.shape[0]
        R = self.radius
        ra = self.a.radius
        states = np.zeros((k, 2 * ra + 1), dtype=np.int64)
        ok = np.ones(k, dtype=bool)
        for j in range(-ra, ra + 1):
            first = starts + j * self.w + R
            cols = first[:, None] + np.arange(self.w)[None, :]
            segs = np.take_along_axis(windows, cols, axis=1)
            code = self._code(segs)
            ok &= code >= 0
            states[:, j + ra] = np.maximum(code, 0)
        return ok, states

    def output(self, windows: np.ndarray, starts: np.ndarray, ok: np.ndarray, states: np.ndarray):
        out = np.zeros(windows.shape[0], dtype=np.int64)
        if ok.any():
            img = self.a.evaluate(states[ok])
            out[ok] = self.blocks[img, -starts[ok]]
        return out


def _find_starts(windows: np.ndarray, marker: Sequence[int], w: int, R: int):
    """Unique offset ``p`` in ``[-(w-1), 0]`` where ``marker`` begins, else ``found=False``."""
    k = windows.shape[0]
    hits = np.zeros((k, w), dtype=bool)
    for i, p in enumerate(range(-(w - 1), 1)):
        h = np.ones(k, dtype=bool)
        for j, sym in enumerate(marker):
            h &= windows[:, R + p + j] == sym
        hits[:, i] = h
    found = hits.sum(axis=1) == 1
    starts = np.argmax(hits, axis=1) - (w - 1)
    return found, starts


def encode_two_state(a: Automaton) -> Automaton:
    """Binary encoding with blocks ``0110 psi(x)``; windows off the block subshift give 1."""
    m, codes = eleven_free_codes(a.states)
    marker = (0, 1, 1, 0)
    blocks = np.array([marker + c for c in codes], dtype=np.int64)
    dec = _BlockDecoder(a, blocks, 2)
    w, R = dec.w, dec.radius

    def func(windows):
        found, starts = _find_starts(windows, marker, w, R)
        starts = np.where(found, starts, 0)
        ok, states = dec.decode(windows, starts)
        ok &= found
        out = dec.output(windows, starts, ok, states)
        return np.where(ok, out, 1)

    meta = {"code_width": w, "codes": tuple(tuple(b) for b in blocks.tolist())}
    return Automaton.lazy(2, R, func, label=f"bin({a.label})", meta=meta)


def encode_captive(a: Automaton) -> Automaton:
    """Captive encoding with blocks ``# u # x``; off the block subshift take the window maximum."""
    n = a.states
    hash_ = n
    u = tuple(range(n))
    marker = (hash_,) + u + (hash_,)
    blocks = np.array([marker + (x,) for x in range(n)], dtype=np.int64)
    dec = _BlockDecoder(a, blocks, n + 1)
    w, R = dec.w, dec.radius

    def func(windows):
        found, starts = _find_starts(windows, marker, w, R)
        starts = np.where(found, starts, 0)
        ok, states = dec.decode(windows, starts)
        ok &= found
        out = dec.output(windows, starts, ok, states)
        return np.where(ok, out, windows.max(axis=1))

    meta = {"code_width": w, "codes": tuple(tuple(b) for b in blocks.tolist())}
    return Automaton.lazy(n + 1, R, func, label=f"captive({a.label})", meta=meta)


def block_map(a_states: int, encoded: Automaton):
    """Injection from the states of ``a`` into the packed states of ``encoded``."""
    from .morphism import INJECTION, StateMap

    codes = np.array(encoded.meta["codes"], dtype=np.int64)
    w = encoded.meta["code_width"]
    powers = encoded.states ** np.arange(w - 1, -1, -1, dtype=np.int64)
    return StateMap(a_states, encoded.states**w, tuple((codes @ powers).tolist()), INJECTION)


def encode_equipt(a: Automaton) -> Automaton:
    """``a`` plus a spreading state ``kappa = n`` (radius at least 1)."""
    n = a.states
    R = max(a.radius, 1)

    def func(windows):
        spread = (windows == n).any(axis=1)
        out = np.zeros(windows.shape[0], dtype=np.int64)
        if (~spread).any():
            out[~spread] = a.central(windows[~spread], R)
        return np.where(spread, n, out)

    return Automaton.lazy(n + 1, R, func, label=f"equipt({a.label})")


def encode_sensi(a: Automaton) -> Automaton:
    out = product(product(a, shift(2, 1)), shift(2, -1))
    out.label = f"sensi({a.label})"
    return out


ZOO_SMALL = {
    "identity2": lambda: identity(2),
    "shift2": lambda: shift(2, 1),
    "shift2m": lambda: shift(2, -1),
    "z2": lambda: additive(2),
    "z3": lambda: additive(3),
    "max2": lambda: delta_max(2),
    "max3": lambda: delta_max(3),
    "const2": lambda: constant(2, 0),
    "identity3": lambda: identity(3),
    "shift3": lambda: shift(3, 1),
    "eca30": lambda: elementary(30),
    "eca110": lambda: elementary(110),
}
"""Small automata (``n <= 3``, ``r <= 1``) used by the test suites."""
