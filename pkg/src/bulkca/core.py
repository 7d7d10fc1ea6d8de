"""One-dimensional cellular automata on spatially periodic configurations.

An automaton is a state count ``n``, a radius ``r`` and a local rule mapping
windows ``(x[-r], ..., x[r])`` to a state.  The rule is either a materialized
table indexed by the window read as a base-``n`` number (leftmost cell most
significant) or a lazy evaluator working on batches of windows.  Lazy rules
are materialized on demand when the table has at most ``MATERIALIZE_LIMIT``
entries.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

MATERIALIZE_LIMIT = 1 << 24
# lazy automata whose table is at most this large are materialized on first use
EAGER_LIMIT = 1 << 16
CHUNK = 1 << 17
# lazy rules whose support admits a table of at most this size get one
SUPPORT_TABLE_LIMIT = 1 << 20

Evaluator = Callable[[np.ndarray], np.ndarray]


class CAError(ValueError):
    """Base class for errors raised by this package."""


class StateCountMismatch(CAError):
    pass


class TableTooLarge(CAError):
    pass


def table_size(n: int, radius: int) -> int:
    return n ** (2 * radius + 1)


def state_dtype(n: int):
    if n <= 1 << 8:
        return np.uint8
    if n <= 1 << 16:
        return np.uint16
    return np.int64


def window_powers(n: int, width: int) -> np.ndarray:
    return np.array([n ** (width - 1 - i) for i in range(width)], dtype=np.int64)


def index_windows(n: int, width: int, indices: np.ndarray) -> np.ndarray:
    """Decode window indices into an ``(k, width)`` array of cells."""
    indices = np.asarray(indices, dtype=np.int64)
    out = np.empty((indices.shape[0], width), dtype=np.int64)
    rest = indices.copy()
    for i in range(width - 1, -1, -1):
        out[:, i] = rest % n
        rest //= n
    return out


def all_words(n: int, length: int) -> np.ndarray:
    """Every word of the given length, in base-``n`` order, as a 2-D array."""
    if length == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return index_windows(n, length, np.arange(n**length, dtype=np.int64))


def minkowski(a: Iterable[int], b: Iterable[int]) -> frozenset:
    return frozenset(x + y for x in a for y in b)


class Automaton:
    """A one-dimensional CA ``(n, r, f)``.

    Exactly one of ``table`` or ``func`` is given.  ``func`` receives an int64
    array of shape ``(k, 2r+1)`` and returns ``k`` states.  ``support`` is a
    set of offsets the rule may depend on (a superset of the minimal
    neighborhood); it defaults to the whole window and is recomputed exactly
    once a table exists.
    """

    def __init__(
        self,
        states: int,
        radius: int,
        table=None,
        func: Evaluator | None = None,
        label: str = "",
        support: Iterable[int] | None = None,
        meta: dict | None = None,
    ):
        if states < 1:
            raise CAError("state count must be positive")
        if radius < 0:
            raise CAError("radius must be non-negative")
        if (table is None) == (func is None):
            raise CAError("give exactly one of table or func")
        self.states = int(states)
        self.radius = int(radius)
        self.label = label
        self.meta = dict(meta or {})
        self._func = func
        self._table = None
        if table is not None:
            arr = np.asarray(table, dtype=np.int64).ravel()
            size = table_size(self.states, self.radius)
            if arr.shape[0] != size:
                raise CAError(f"table has {arr.shape[0]} entries, expected {size}")
            if arr.size and (arr.min() < 0 or arr.max() >= self.states):
                raise CAError("table entry out of range")
            self._table = arr.astype(state_dtype(self.states))
        if support is None:
            self._support = frozenset(range(-self.radius, self.radius + 1))
        else:
            sup = frozenset(int(s) for s in support)
            if any(abs(s) > self.radius for s in sup):
                raise CAError("support offset outside the radius")
            self._support = sup

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_function(cls, states: int, radius: int, f: Callable[..., int], **kw) -> "Automaton":
        """Materialize a rule given as a Python function of ``2r+1`` cells."""
        width = 2 * radius + 1
        table = [f(*w) for w in itertools.product(range(states), repeat=width)]
        return cls(states, radius, table=table, **kw)

    @classmethod
    def lazy(cls, states: int, radius: int, func: Evaluator, **kw) -> "Automaton":
        return cls(states, radius, func=func, **kw)

    # -- properties -----------------------------------------------------------

    @property
    def width(self) -> int:
        return 2 * self.radius + 1

    @property
    def table_size(self) -> int:
        return table_size(self.states, self.radius)

    @property
    def materializable(self) -> bool:
        return self.table_size <= MATERIALIZE_LIMIT

    @property
    def is_materialized(self) -> bool:
        return self._table is not None

    @cached_property
    def _powers(self) -> np.ndarray:
        return window_powers(self.states, self.width)

    @property
    def table(self) -> np.ndarray:
        if self._table is None:
            if not self.materializable:
                raise TableTooLarge(
                    f"{self.states}^{self.width} entries exceed the materialization limit"
                )
            out = np.empty(self.table_size, dtype=state_dtype(self.states))
            for start in range(0, self.table_size, CHUNK):
                idx = np.arange(start, min(start + CHUNK, self.table_size), dtype=np.int64)
                out[idx] = self._func(index_windows(self.states, self.width, idx))
            self._table = out
            self.__dict__.pop("support", None)
        return self._table

    def materialize(self) -> "Automaton":
        self.table
        return self

    @cached_property
    def support(self) -> frozenset:
        if self._table is not None:
            return _exact_support(self._table, self.states, self.radius)
        return self._support

    # -- evaluation -----------------------------------------------------------

    def evaluate(self, windows: np.ndarray) -> np.ndarray:
        """Apply the local rule to each row of ``windows`` (shape ``(k, 2r+1)``)."""
        windows = np.asarray(windows, dtype=np.int64)
        if self._table is None and self.table_size <= EAGER_LIMIT:
            self.table
        if self._table is not None:
            if windows.shape[0] == 0:
                return np.zeros(0, dtype=np.int64)
            return self._table[windows @ self._powers].astype(np.int64)
        sub = self._support_table()
        if sub is not None:
            cols, powers, table = sub
            if windows.shape[0] == 0:
                return np.zeros(0, dtype=np.int64)
            return table[windows[:, cols] @ powers].astype(np.int64)
        k = windows.shape[0]
        if k <= CHUNK:
            return np.asarray(self._func(windows), dtype=np.int64)
        out = np.empty(k, dtype=np.int64)
        for start in range(0, k, CHUNK):
            out[start:start + CHUNK] = self._func(windows[start:start + CHUNK])
        return out

    def _support_table(self):
        """Lookup over the support offsets only, for lazy rules with a small support."""
        if "_subtable" in self.__dict__:
            return self.__dict__["_subtable"]
        sup = sorted(self.support)
        out = None
        if len(sup) < self.width and self.states ** len(sup) <= SUPPORT_TABLE_LIMIT:
            cols = np.array([o + self.radius for o in sup], dtype=np.int64)
            size = self.states ** len(sup)
            table = np.empty(size, dtype=np.int64)
            for start in range(0, size, CHUNK):
                idx = np.arange(start, min(size, start + CHUNK), dtype=np.int64)
                full = np.zeros((idx.size, self.width), dtype=np.int64)
                full[:, cols] = index_windows(self.states, len(sup), idx)
                table[idx] = self._func(full)
            out = (cols, window_powers(self.states, len(sup)), table)
        self.__dict__["_subtable"] = out
        return out

    def _lookup(self):
        """``(cols, powers, table)`` for a table lookup, or None for an unbounded lazy rule."""
        if self._table is None and self.table_size <= EAGER_LIMIT:
            self.table
        if self._table is not None:
            if "_lookup64" not in self.__dict__:
                self.__dict__["_lookup64"] = (
                    np.arange(self.width, dtype=np.int64), self._powers, self._table.astype(np.int64)
                )
            return self.__dict__["_lookup64"]
        return self._support_table()

    def __call__(self, *cells: int) -> int:
        if len(cells) != self.width:
            raise CAError(f"expected {self.width} cells, got {len(cells)}")
        return int(self.evaluate(np.array([cells], dtype=np.int64))[0])

    def central(self, windows: np.ndarray, radius: int) -> np.ndarray:
        """Evaluate on windows of a larger radius by reading the central part."""
        off = radius - self.radius
        if off < 0:
            raise CAError("windows narrower than the rule")
        return self.evaluate(windows[:, off:off + self.width])

    def renamed(self, label: str) -> "Automaton":
        other = Automaton.__new__(Automaton)
        other.__dict__.update(self.__dict__)
        other.label = label
        other.meta = dict(self.meta)
        return other

    def __repr__(self) -> str:
        kind = "table" if self.is_materialized else "lazy"
        name = f" {self.label!r}" if self.label else ""
        return f"<Automaton{name} n={self.states} r={self.radius} {kind}>"


def _exact_support(table: np.ndarray, n: int, radius: int) -> frozenset:
    width = 2 * radius + 1
    cube = table.reshape((n,) * width)
    out = set()
    for axis in range(width):
        first = np.take(cube, [0], axis=axis)
        if (cube != first).any():
            out.add(axis - radius)
    return frozenset(out)


# -- configurations -----------------------------------------------------------


def primitive_root(word: Sequence[int]) -> tuple:
    word = tuple(word)
    L = len(word)
    for p in range(1, L + 1):
        if L % p == 0 and word == word[:p] * (L // p):
            return word[:p]
    return word


@dataclass(frozen=True, eq=False)
class PeriodicConfig:
    """A spatially periodic configuration given by one period ``word``.

    Cell ``z`` holds ``word[z mod len(word)]``.  Two configurations are equal
    when their primitive periods are equal as words; rotations are distinct.
    """

    states: int
    word: tuple

    def __post_init__(self):
        word = tuple(int(s) for s in self.word)
        if not word:
            raise CAError("a configuration needs at least one cell")
        if self.states < 1 or any(s < 0 or s >= self.states for s in word):
            raise CAError(f"symbol out of range for {self.states} states")
        object.__setattr__(self, "word", word)

    @classmethod
    def of(cls, states: int, word) -> "PeriodicConfig":
        if isinstance(word, str):
            word = [int(ch) for ch in word]
        return cls(states, tuple(word))

    @classmethod
    def parse(cls, text: str, states: int) -> "PeriodicConfig":
        """Parse ``"<L> : s0 s1 ..."``."""
        head, sep, body = text.partition(":")
        if not sep:
            raise CAError("config literal must look like '<L> : s0 s1 ...'")
        L = int(head)
        cells = [int(tok) for tok in body.split()]
        if len(cells) != L:
            raise CAError(f"config literal declares {L} cells but lists {len(cells)}")
        return cls(states, tuple(cells))

    def __str__(self) -> str:
        return f"{len(self.word)} : " + " ".join(map(str, self.word))

    def __len__(self) -> int:
        return len(self.word)

    @cached_property
    def primitive(self) -> tuple:
        return primitive_root(self.word)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PeriodicConfig):
            return NotImplemented
        return self.states == other.states and self.primitive == other.primitive

    def __hash__(self) -> int:
        return hash((self.states, self.primitive))

    def rotate(self, k: int) -> "PeriodicConfig":
        """Translate by ``k``: the result holds ``x[z - k]`` at cell ``z``."""
        L = len(self.word)
        k %= L
        return PeriodicConfig(self.states, self.word[L - k:] + self.word[:L - k])

    def replicate(self, times: int) -> "PeriodicConfig":
        return PeriodicConfig(self.states, self.word * times)

    def array(self) -> np.ndarray:
        return np.array(self.word, dtype=np.int64)


# -- dynamics -----------------------------------------------------------------


def step_words(a: Automaton, words: np.ndarray) -> np.ndarray:
    """One step on a batch of periodic words of equal length, shape ``(k, L)``."""
    words = np.asarray(words, dtype=np.int64)
    k, L = words.shape
    offsets = np.arange(-a.radius, a.radius + 1)
    cols = (np.arange(L)[:, None] + offsets[None, :]) % L
    windows = words[:, cols].reshape(k * L, a.width)
    return a.evaluate(windows).reshape(k, L)


def evolve_valid(a: Automaton, lines: np.ndarray, steps: int) -> np.ndarray:
    """Apply ``steps`` steps to finite lines, dropping ``r`` cells per side each step."""
    lines = np.asarray(lines, dtype=np.int64)
    r = a.radius
    for _ in range(steps):
        k, w = lines.shape
        out_w = w - 2 * r
        if out_w <= 0:
            raise CAError("line too short for the requested number of steps")
        lookup = a._lookup()
        if lookup is None:
            win = np.lib.stride_tricks.sliding_window_view(lines, 2 * r + 1, axis=1)
            lines = a.evaluate(win.reshape(k * out_w, 2 * r + 1)).reshape(k, out_w)
            continue
        # index straight from shifted slices, no window matrix
        cols, powers, table = lookup
        idx = np.zeros((k, out_w), dtype=np.int64)
        for c, p in zip(cols.tolist(), powers.tolist()):
            idx += lines[:, c:c + out_w] * p
        lines = table[idx]
    return lines


def _check_states(a: Automaton, c: PeriodicConfig):
    if c.states != a.states:
        raise StateCountMismatch(
            f"configuration over {c.states} states given to a {a.states}-state automaton"
        )


def step(a: Automaton, c: PeriodicConfig) -> PeriodicConfig:
    _check_states(a, c)
    out = step_words(a, c.array()[None, :])[0]
    return PeriodicConfig(a.states, tuple(out.tolist()))


def iterate(a: Automaton, c: PeriodicConfig, t: int) -> PeriodicConfig:
    if t < 0:
        raise CAError("t must be non-negative")
    _check_states(a, c)
    w = c.array()[None, :]
    for _ in range(t):
        w = step_words(a, w)
    return PeriodicConfig(a.states, tuple(w[0].tolist()))


def power(a: Automaton, t: int) -> Automaton:
    """``a^t``: same states, radius ``r*t``, one step equals ``t`` steps of ``a``."""
    if t < 1:
        raise CAError("t must be positive")
    if t == 1:
        return a
    radius = a.radius * t
    sup = frozenset([0])
    for _ in range(t):
        sup = minkowski(sup, a.support)

    def func(windows):
        return evolve_valid(a, windows, t)[:, 0]

    return Automaton.lazy(a.states, radius, func, label=f"{a.label}^{t}", support=sup)


def product(a: Automaton, b: Automaton) -> Automaton:
    """Cartesian product; the pair ``(x, y)`` is state ``x * n_b + y``."""
    R = max(a.radius, b.radius)
    nb = b.states

    def func(windows):
        return a.central(windows // nb, R) * nb + b.central(windows % nb, R)

    label = f"({a.label} x {b.label})" if a.label or b.label else ""
    return Automaton.lazy(
        a.states * nb, R, func, label=label, support=a.support | b.support, meta={"factors": (a, b)}
    )


def canonicalize_radius(a: Automaton, radius: int) -> Automaton:
    if radius < a.radius:
        raise CAError(f"cannot shrink radius {a.radius} to {radius}")
    if radius == a.radius:
        return a

    def func(windows):
        return a.central(windows, radius)

    return Automaton.lazy(a.states, radius, func, label=a.label, support=a.support, meta=a.meta)


def mirror(a: Automaton) -> Automaton:
    """The automaton conjugate to ``a`` by ``x_z -> x_{-z}``."""

    def func(windows):
        return a.evaluate(windows[:, ::-1])

    sup = frozenset(-s for s in a.support)
    return Automaton.lazy(a.states, a.radius, func, label=f"~{a.label}", support=sup)


@dataclass(frozen=True)
class OrbitCycle:
    preperiod: int
    period: int


def orbit_cycle(a: Automaton, c: PeriodicConfig, t_max: int) -> OrbitCycle | None:
    """Smallest ``(p, q)`` with ``G^(p+q)(c) = G^p(c)``; ``None`` if not seen by ``t_max``."""
    if t_max < 1:
        raise CAError("t_max must be positive")
    _check_states(a, c)
    w = c.array()[None, :]
    seen = {tuple(w[0].tolist()): 0}
    for t in range(1, t_max + 1):
        w = step_words(a, w)
        key = tuple(w[0].tolist())
        if key in seen:
            p = seen[key]
            return OrbitCycle(p, t - p)
        seen[key] = t
    return None


def minimal_neighborhood(a: Automaton) -> frozenset:
    """Offsets the rule effectively depends on (exact; needs a materializable table)."""
    if not a.materializable:
        raise TableTooLarge(
            f"{a.states}^{a.width} windows is too many for an exact scan; "
            "lower the radius or use sample_neighborhood"
        )
    return _exact_support(a.table, a.states, a.radius)


def sample_neighborhood(a: Automaton, samples: int = 4096, seed: int = 0) -> frozenset:
    """Offsets witnessed as relevant by random window pairs (a subset, not exhaustive)."""
    rng = np.random.default_rng(seed)
    found = set()
    for i in range(a.width):
        w = rng.integers(0, a.states, size=(samples, a.width))
        v = w.copy()
        v[:, i] = rng.integers(0, a.states, size=samples)
        if (a.evaluate(w) != a.evaluate(v)).any():
            found.add(i - a.radius)
    return frozenset(found)


# -- Turing machines ----------------------------------------------------------


@dataclass(frozen=True)
class TuringMachine:
    """``transition[(q, g)] = (q', g', move)`` with ``move`` in ``{-1, 0, 1}``."""

    states: int
    symbols: int
    blank: int
    transition: dict = field(hash=False)

    def __post_init__(self):
        if not 0 <= self.blank < self.symbols:
            raise CAError("blank symbol out of range")
        for q in range(self.states):
            for g in range(self.symbols):
                if (q, g) not in self.transition:
                    raise CAError(f"transition undefined on state {q}, symbol {g}")
                q2, g2, d = self.transition[(q, g)]
                if not (0 <= q2 < self.states and 0 <= g2 < self.symbols and d in (-1, 0, 1)):
                    raise CAError(f"bad transition {(q, g)} -> {(q2, g2, d)}")
