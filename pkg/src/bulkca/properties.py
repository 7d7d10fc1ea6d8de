"""Decision procedures for global properties of one-dimensional automata.

Surjectivity and injectivity are decided on the de Bruijn graph of a compact
form of the rule: the window is cut down to the span of the dependency
support, which conjugates the automaton by a translation and so preserves
both properties.  Products are analysed factor by factor.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core import (
    Automaton,
    CAError,
    PeriodicConfig,
    all_words,
    index_windows,
    iterate,
    minimal_neighborhood,
    orbit_cycle,
    step,
    step_words,
    window_powers,
)

log = logging.getLogger(__name__)

HOLDS, FAILS, UNKNOWN = "holds", "fails", "unknown"
SUBSET_BUDGET = 1 << 20
PAIR_BUDGET = 1 << 22
INVERSE_WINDOW_LIMIT = 1 << 22


@dataclass
class Verdict:
    status: str
    witness: Any = None
    note: str = ""
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.status == HOLDS

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    @property
    def fails(self) -> bool:
        return self.status == FAILS

    @property
    def unknown(self) -> bool:
        return self.status == UNKNOWN

    def __str__(self) -> str:
        parts = [self.status]
        if self.witness is not None:
            parts.append(_format_witness(self.witness))
        if self.note:
            parts.append(f"({self.note})")
        return " ".join(parts)


def _format_witness(w) -> str:
    if isinstance(w, tuple) and all(isinstance(x, PeriodicConfig) for x in w):
        return " | ".join(str(x) for x in w)
    if isinstance(w, tuple) and all(isinstance(x, int) for x in w):
        return "".join(str(x) for x in w) if all(x < 10 for x in w) else " ".join(map(str, w))
    return str(w)


# -- compact form --------------------------------------------------------------


@dataclass
class Compact:
    """Rule restricted to the window ``[lo, hi]`` of offsets, with ``hi > lo``."""

    states: int
    lo: int
    hi: int
    table: np.ndarray

    @property
    def span(self) -> int:
        return self.hi - self.lo + 1


def compact(a: Automaton) -> Compact:
    sup = a.support
    lo, hi = (min(sup), max(sup)) if sup else (0, 0)
    if hi == lo:
        hi = lo + 1 if lo < a.radius else lo
        lo = hi - 1
    span = hi - lo + 1
    n = a.states
    if n**span > 1 << 24:
        raise CAError(f"compact table {n}^{span} is too large")
    words = all_words(n, span)
    R = max(a.radius, span)
    full = np.zeros((words.shape[0], 2 * R + 1), dtype=np.int64)
    full[:, lo + R:hi + R + 1] = words
    table = a.central(full, R)
    return Compact(n, lo, hi, table)


def _factors(a: Automaton):
    f = a.meta.get("factors")
    return f if f else None


# -- balance, permutativity, quiescence ----------------------------------------


def _table(a: Automaton) -> np.ndarray:
    if not a.materializable:
        raise CAError("this analysis needs a materialized rule table")
    return a.table


def is_balanced(a: Automaton) -> bool:
    """Every state occurs ``n^(2r)`` times in the rule table."""
    counts = np.bincount(_table(a).astype(np.int64), minlength=a.states)
    return bool((counts == a.states ** (2 * a.radius)).all())


def is_lr_permutative(a: Automaton) -> bool:
    """Both border maps ``x -> f(x, ...)`` and ``x -> f(..., x)`` are bijections."""
    n, w = a.states, a.width
    cube = _table(a).reshape((n,) * w)
    for axis in (0, w - 1):
        moved = np.moveaxis(cube, axis, 0).reshape(n, -1)
        srt = np.sort(moved, axis=0)
        if not (srt == np.arange(n)[:, None]).all():
            return False
    return True


def quiescent_states(a: Automaton) -> frozenset:
    w = np.repeat(np.arange(a.states)[:, None], a.width, axis=1)
    out = a.evaluate(w)
    return frozenset(int(q) for q in np.nonzero(out == np.arange(a.states))[0])


def spreading_states(a: Automaton) -> frozenset:
    """States ``k`` such that any window with ``k`` at a relevant offset maps to ``k``."""
    nb = minimal_neighborhood(a)
    if not any(o != 0 for o in nb):
        return frozenset()
    n, w = a.states, a.width
    cube = a.table.reshape((n,) * w)
    out = set()
    for k in range(n):
        if all((np.take(cube, k, axis=o + a.radius) == k).all() for o in nb):
            out.add(k)
    return frozenset(out)


def is_captive(a: Automaton, samples: int = 1 << 16, seed: int = 0) -> bool:
    """Output always among the window's cells.

    Exact on materializable rules; otherwise checked on random windows and,
    for block encodings, on windows cut from random block sequences.
    """
    if a.materializable:
        n, w = a.states, a.width
        ok = True
        for start in range(0, a.table_size, 1 << 18):
            idx = np.arange(start, min(a.table_size, start + (1 << 18)), dtype=np.int64)
            win = index_windows(n, w, idx)
            out = a.table[idx].astype(np.int64)
            ok &= bool((win == out[:, None]).any(axis=1).all())
        return ok
    rng = np.random.default_rng(seed)
    batches = [rng.integers(0, a.states, size=(samples, a.width))]
    codes = a.meta.get("codes")
    if codes:
        codes = np.array(codes, dtype=np.int64)
        cw = codes.shape[1]
        nblocks = a.width // cw + 2
        pick = rng.integers(0, codes.shape[0], size=(samples, nblocks))
        lines = codes[pick].reshape(samples, nblocks * cw)
        phase = rng.integers(0, cw, size=samples)
        cols = phase[:, None] + np.arange(a.width)[None, :]
        win = np.take_along_axis(lines, cols, axis=1)
        noisy = win.copy()
        hit = rng.integers(0, a.width, size=samples)
        noisy[np.arange(samples), hit] = rng.integers(0, a.states, size=samples)
        batches += [win, noisy]
    log.info("captivity of a lazy rule checked on %d sampled windows", sum(len(b) for b in batches))
    for win in batches:
        out = a.evaluate(win)
        if not (win == out[:, None]).any(axis=1).all():
            return False
    return True


# -- surjectivity --------------------------------------------------------------


def _successor_masks(c: Compact):
    """``succ[v][x]``: bitmask of de Bruijn vertices reached from ``v`` reading output ``x``."""
    n, k = c.states, c.span - 1
    V = n**k
    succ = [[0] * n for _ in range(V)]
    for idx, out in enumerate(c.table.tolist()):
        v, u = idx // n, idx % (V)
        succ[v][out] |= 1 << u
    return succ


def is_surjective(a: Automaton, budget: int = SUBSET_BUDGET) -> Verdict:
    """Exact surjectivity test; failures carry the shortest, lexicographically least orphan."""
    fac = _factors(a)
    if fac is not None:
        return _product_surjective(a, fac, budget)
    c = compact(a)
    n = c.states
    V = n ** (c.span - 1)
    succ = _successor_masks(c)
    full = (1 << V) - 1
    seen = {full: ()}
    queue = deque([full])
    while queue:
        S = queue.popleft()
        word = seen[S]
        for x in range(n):
            T = 0
            bits = S
            while bits:
                low = bits & -bits
                T |= succ[low.bit_length() - 1][x]
                bits ^= low
            if T == 0:
                return Verdict(FAILS, word + (x,), "orphan word")
            if T not in seen:
                if len(seen) >= budget:
                    return Verdict(UNKNOWN, None, f"subset budget {budget} reached")
                seen[T] = word + (x,)
                queue.append(T)
    return Verdict(HOLDS, None, f"{len(seen)} reachable subsets")


def _product_surjective(a, fac, budget) -> Verdict:
    left, right = fac
    for i, part in enumerate(fac):
        v = is_surjective(part, budget)
        if not v.holds:
            if v.fails:
                other = right.states if i == 0 else 1
                # the orphan on one component with the other component all 0
                word = tuple(x * other if i == 0 else x for x in v.witness)
                return Verdict(FAILS, word, "orphan word (product component)")
            return v
    return Verdict(HOLDS, None, "every product component is surjective")


def orphan_brute_force(a: Automaton, max_len: int) -> tuple | None:
    """Shortest, lexicographically least orphan up to ``max_len`` by image enumeration."""
    c = compact(a)
    k = c.span - 1
    powers = window_powers(c.states, c.span)
    for L in range(1, max_len + 1):
        pre = all_words(c.states, L + k)
        img = np.zeros((pre.shape[0], L), dtype=np.int64)
        for i in range(L):
            img[:, i] = c.table[pre[:, i:i + c.span] @ powers]
        codes = np.unique(img @ window_powers(c.states, L))
        if codes.size < c.states**L:
            missing = np.setdiff1d(np.arange(c.states**L), codes)[0]
            return tuple(all_words(c.states, L)[missing].tolist())
    return None


# -- injectivity ---------------------------------------------------------------


def _pair_graph(c: Compact):
    """Edges of the pair graph as arrays of (source pair, target pair)."""
    n, k = c.states, c.span - 1
    V = n**k
    # windows grouped by output
    src = np.arange(n ** c.span) // n
    dst = np.arange(n ** c.span) % V
    out = c.table.astype(np.int64)
    S, T = [], []
    for x in range(n):
        idx = np.nonzero(out == x)[0]
        a, b = np.meshgrid(idx, idx, indexing="ij")
        S.append(src[a.ravel()] * V + src[b.ravel()])
        T.append(dst[a.ravel()] * V + dst[b.ravel()])
    return np.concatenate(S), np.concatenate(T), V


def _trim(S, T, nv):
    alive = np.ones(nv, dtype=bool)
    while True:
        live_edge = alive[S] & alive[T]
        has_out = np.zeros(nv, dtype=bool)
        has_in = np.zeros(nv, dtype=bool)
        has_out[S[live_edge]] = True
        has_in[T[live_edge]] = True
        nxt = alive & has_out & has_in
        if (nxt == alive).all():
            return alive, live_edge
        alive = nxt


def is_injective(a: Automaton, budget: int = PAIR_BUDGET) -> Verdict:
    """Exact injectivity test; failures carry two distinct periodic configurations with equal images."""
    fac = _factors(a)
    if fac is not None:
        return _product_injective(a, fac, budget)
    c = compact(a)
    n, k = c.states, c.span - 1
    V = n**k
    if V * V > budget:
        return Verdict(UNKNOWN, None, f"pair graph of {V * V} vertices exceeds the budget")
    S, T, _ = _pair_graph(c)
    alive, live = _trim(S, T, V * V)
    diag = np.arange(V) * (V + 1)
    off = alive.copy()
    off[diag] = False
    if not off.any():
        return Verdict(HOLDS, None, "no off-diagonal bi-infinite path")
    S, T = S[live], T[live]
    adj: dict = {}
    for s, t in zip(S.tolist(), T.tolist()):
        adj.setdefault(s, []).append(t)
    cycle = _shortest_offdiag_cycle(adj, np.nonzero(off)[0].tolist())
    if cycle is None:
        return Verdict(FAILS, None, "asymptotic pair (no periodic witness)")
    x, y = _cycle_configs(cycle, n, k, V)
    return Verdict(FAILS, (x, y), "distinct periodic configurations with equal images")


def _shortest_offdiag_cycle(adj, starts):
    best = None
    for s in starts:
        prev = {s: None}
        q = deque([s])
        found = None
        while q and found is None:
            u = q.popleft()
            for v in adj.get(u, ()):
                if v == s:
                    found = u
                    break
                if v not in prev:
                    prev[v] = u
                    q.append(v)
        if found is None:
            continue
        path = [found]
        while path[-1] != s:
            path.append(prev[path[-1]])
        path.reverse()
        if best is None or len(path) < len(best):
            best = path
    return best


def _cycle_configs(cycle, n, k, V):
    """Read the last cell of each vertex along the cycle."""
    xs, ys = [], []
    for v in cycle:
        p, q = divmod(v, V)
        xs.append(p % n)
        ys.append(q % n)
    return PeriodicConfig(n, tuple(xs)), PeriodicConfig(n, tuple(ys))


def _product_injective(a, fac, budget) -> Verdict:
    left, right = fac
    for i, part in enumerate(fac):
        v = is_injective(part, budget)
        if not v.holds:
            if v.fails and v.witness is not None:
                x, y = v.witness
                other = right.states
                if i == 0:
                    wx = tuple(s * other for s in x.word)
                    wy = tuple(s * other for s in y.word)
                else:
                    wx, wy = x.word, y.word
                return Verdict(
                    FAILS,
                    (PeriodicConfig(a.states, wx), PeriodicConfig(a.states, wy)),
                    "collision on a product component",
                )
            return v
    return Verdict(HOLDS, None, "every product component is injective")


def collision_brute_force(a: Automaton, max_period: int):
    """First pair of distinct periodic configurations (period ``<= max_period``) with equal images."""
    for L in range(1, max_period + 1):
        words = all_words(a.states, L)
        img = step_words(a, words) @ window_powers(a.states, L)
        order = np.argsort(img, kind="stable")
        si = img[order]
        dup = np.nonzero(si[1:] == si[:-1])[0]
        if dup.size:
            i, j = order[dup[0]], order[dup[0] + 1]
            return (
                PeriodicConfig(a.states, tuple(words[i].tolist())),
                PeriodicConfig(a.states, tuple(words[j].tolist())),
            )
    return None


def inverse(a: Automaton, r_max: int = 3) -> Automaton | Verdict:
    """Least-radius rule ``g`` with ``g . f = id``; an Unknown verdict when none is found by ``r_max``."""
    v = is_injective(a)
    if v.fails:
        raise CAError("inverse requested for a non-injective automaton")
    n, r = a.states, a.radius
    for rho in range(0, r_max + 1):
        L = 2 * rho + 2 * r + 1
        if n**L > INVERSE_WINDOW_LIMIT:
            return Verdict(UNKNOWN, None, f"preimage enumeration too large at radius {rho}")
        pre = all_words(n, L)
        img = np.zeros((pre.shape[0], 2 * rho + 1), dtype=np.int64)
        for i in range(2 * rho + 1):
            img[:, i] = a.evaluate(pre[:, i:i + 2 * r + 1])
        centre = pre[:, r + rho]
        key = img @ window_powers(n, 2 * rho + 1)
        table = np.full(n ** (2 * rho + 1), -1, dtype=np.int64)
        table[key] = centre
        if (table[key] != centre).any() or (table < 0).any():
            continue
        return Automaton(n, rho, table=table, label=f"inv({a.label})")
    return Verdict(UNKNOWN, None, f"no inverse up to radius {r_max}")


# -- nilpotency over periodic configurations -----------------------------------


def _cycle_of(a: Automaton, c: PeriodicConfig, t_max: int):
    oc = orbit_cycle(a, c, t_max)
    if oc is None:
        return None
    x = iterate(a, c, oc.preperiod)
    members = []
    for _ in range(oc.period):
        members.append(x)
        x = step(a, x)
    return tuple(members)


def nilpotent_over_periodic(a: Automaton, max_period: int, max_time: int) -> Verdict:
    """Bounded look for the common attracting configuration of all periodic points."""
    if max_period < 1 or max_time < 1:
        raise CAError("bounds must be positive")
    first = None
    first_cfg = None
    closed = True
    for L in range(1, max_period + 1):
        for w in all_words(a.states, L):
            c = PeriodicConfig(a.states, tuple(w.tolist()))
            cyc = _cycle_of(a, c, max_time)
            if cyc is None:
                closed = False
                continue
            key = frozenset(cyc)
            if first is None:
                first, first_cfg, first_cyc = key, c, cyc
            elif key != first:
                return Verdict(
                    FAILS,
                    (first_cyc, cyc),
                    f"{first_cfg} and {c} reach disjoint cycles",
                    {"configs": (first_cfg, c)},
                )
    bound = f"period <= {max_period}, time <= {max_time}"
    if closed and len(first) == 1:
        return Verdict(UNKNOWN, first_cyc, f"consistent-with-nilpotent at {bound}",
                       {"consistent": True})
    return Verdict(UNKNOWN, None, f"no certificate at {bound}", {"consistent": False})
