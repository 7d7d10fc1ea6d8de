"""Space-time rescaling transforms ``<m, tau, T, s>``.

A transform packs ``m`` cells into one (optionally after mirroring the
lattice), runs ``T`` steps and translates by ``s`` cells, where the
translation convention is ``shift_s(x)[z] = x[z - s]``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import (
    Automaton,
    CAError,
    PeriodicConfig,
    evolve_valid,
    index_windows,
    minkowski,
    mirror,
    window_powers,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Transform:
    m: int = 1
    tau: int = 1
    T: int = 1
    s: int = 0

    def __post_init__(self):
        if self.m < 1 or self.T < 1:
            raise CAError("m and T must be positive")
        if self.tau not in (1, -1):
            raise CAError("tau must be +1 or -1")

    @classmethod
    def parse(cls, text: str) -> "Transform":
        """Parse ``m:T:s`` with an optional ``~`` prefix for ``tau = -1``."""
        text = text.strip()
        tau = 1
        if text.startswith("~"):
            tau, text = -1, text[1:]
        parts = text.split(":")
        if len(parts) != 3:
            raise CAError(f"transform literal {text!r} must be m:T:s")
        m, T, s = (int(p) for p in parts)
        return cls(m, tau, T, s)

    def __str__(self) -> str:
        return f"{'~' if self.tau < 0 else ''}{self.m}:{self.T}:{self.s}"

    @property
    def trivial(self) -> bool:
        return self == TRIVIAL


TRIVIAL = Transform(1, 1, 1, 0)


def packing_factor(length: int, m: int) -> int:
    """How many copies of a period of ``length`` cells are needed to pack by ``m``."""
    return m // math.gcd(length, m)


def _mirror_word(word: np.ndarray) -> np.ndarray:
    # (V x)_z = x_{-z}
    L = word.shape[-1]
    return word[..., (-np.arange(L)) % L]


def pack_words(words: np.ndarray, n: int, m: int, tau: int = 1) -> np.ndarray:
    words = np.asarray(words, dtype=np.int64)
    if tau < 0:
        words = _mirror_word(words)
    k, L = words.shape
    if L % m:
        raise CAError("word length must be a multiple of m")
    return words.reshape(k, L // m, m) @ window_powers(n, m)


_DIGIT_TABLE_LIMIT = 1 << 16


@lru_cache(maxsize=64)
def _digit_table(n: int, m: int) -> np.ndarray:
    return index_windows(n, m, np.arange(n**m, dtype=np.int64)).astype(np.int64)


def unpack_words(words: np.ndarray, n: int, m: int, tau: int = 1) -> np.ndarray:
    words = np.asarray(words, dtype=np.int64)
    k, L = words.shape
    if n**m <= _DIGIT_TABLE_LIMIT:
        cells = _digit_table(n, m)[words].reshape(k, L * m)
        return _mirror_word(cells) if tau < 0 else cells
    cells = np.empty((k, L, m), dtype=np.int64)
    rest = words.copy()
    for i in range(m - 1, -1, -1):
        cells[:, :, i] = rest % n
        rest //= n
    cells = cells.reshape(k, L * m)
    return _mirror_word(cells) if tau < 0 else cells


def pack(c: PeriodicConfig, m: int, tau: int = 1) -> PeriodicConfig:
    """Group ``m`` consecutive cells into one state over ``n**m`` states."""
    factor = packing_factor(len(c), m)
    if factor > 1:
        log.debug("replicating period %d by %d before packing by %d", len(c), factor, m)
        c = c.replicate(factor)
    out = pack_words(c.array()[None, :], c.states, m, tau)[0]
    return PeriodicConfig(c.states**m, tuple(out.tolist()))


def root(N: int, m: int) -> int:
    n = max(1, round(N ** (1.0 / m)))
    for cand in (n - 1, n, n + 1):
        if cand >= 1 and cand**m == N:
            return cand
    raise CAError(f"{N} states is not an {m}-th power")


def unpack(c: PeriodicConfig, m: int, tau: int = 1) -> PeriodicConfig:
    n = root(c.states, m)
    out = unpack_words(c.array()[None, :], n, m, tau)[0]
    return PeriodicConfig(n, tuple(out.tolist()))


def shift_config(c: PeriodicConfig, s: int) -> PeriodicConfig:
    return c.rotate(s)


def _transformed_support(a: Automaton, m: int, T: int, s: int) -> frozenset:
    cone = frozenset([0])
    for _ in range(T):
        cone = minkowski(cone, a.support)
    cells = {z - s + d for z in range(m) for d in cone}
    return frozenset(c // m for c in cells)


def apply_transform(a: Automaton, t: Transform) -> Automaton:
    """The automaton over ``n**m`` states whose step is pack . shift_s . G^T . unpack."""
    if t.trivial:
        return a
    if t.tau < 0:
        inner = apply_transform(mirror(a), Transform(t.m, 1, t.T, -t.s))
        inner.label = f"{a.label}<{t}>"
        return inner
    m, T, s = t.m, t.T, t.s
    n = a.states
    r = a.radius
    sup = _transformed_support(a, m, T, s)
    rho = max((abs(b) for b in sup), default=0)
    # radius covering the full dependency cone; windows are padded up to it
    full = max(-((-s - r * T) // m), (m - 1 - s + r * T) // m, 0)
    first = -m * full + r * T
    cols = np.arange(m) - s - first
    powers = window_powers(n, m)
    pad = full - rho

    def func(windows):
        if pad:
            windows = np.pad(windows, ((0, 0), (pad, pad)))
        lines = evolve_valid(a, unpack_words(windows, n, m), T)
        return lines[:, cols] @ powers

    return Automaton.lazy(n**m, rho, func, label=f"{a.label}<{t}>", support=sup)


def grouping(a: Automaton, k: int) -> Automaton:
    """``a^[k]``: the transform ``<k, 1, k, 0>``."""
    if k < 1:
        raise CAError("grouping parameter must be positive")
    return apply_transform(a, Transform(k, 1, k, 0))


@dataclass(frozen=True)
class Normalization:
    """Result of ``normalize_composition``.

    ``apply_transform(apply_transform(F, alpha), beta)`` equals the grouping
    ``F^[t]`` up to ``relabel``: when ``alpha`` mirrors, each state of the
    result is the grouped block with every ``sub_block``-cell piece reversed.
    """

    beta: Transform
    t: int
    sub_block: int | None = None

    def relabel(self, state: int, n: int) -> int:
        if self.sub_block is None:
            return state
        m = self.sub_block
        cells = unpack_words(np.array([[state]]), n, self.t)[0]
        cells = cells.reshape(-1, m)[:, ::-1].ravel()
        return int(cells @ window_powers(n, self.t))

    def relabel_words(self, words: np.ndarray, n: int) -> np.ndarray:
        if self.sub_block is None:
            return np.asarray(words, dtype=np.int64)
        words = np.asarray(words, dtype=np.int64)
        k, L = words.shape
        cells = unpack_words(words, n, self.t).reshape(k, L, self.t // self.sub_block, self.sub_block)
        cells = cells[..., ::-1].reshape(k, L * self.t)
        return pack_words(cells, n, self.t)


def normalize_composition(alpha: Transform) -> Normalization:
    """Find ``beta`` and ``t`` such that transforming by ``alpha`` then ``beta`` groups by ``t``."""
    m, T, s = alpha.m, alpha.T, alpha.s
    # least t, a multiple of lcm(m, T), for which beta can cancel the shift exactly
    t = math.lcm(m, T)
    while (t // T) * s % m:
        t += math.lcm(m, T)
    back = (t // T) * s // m
    beta = Transform(t // m, alpha.tau, t // T, -back if alpha.tau > 0 else back)
    sub = alpha.m if alpha.tau < 0 and alpha.m > 1 else None
    return Normalization(beta, t, sub)
