"""Sub-automaton, quotient and mixed relations between concrete automata.

Both relations are commutation equations ``h(f_X(v)) = f_Y(h(v))`` for a
state map ``h`` from the states of ``X`` to those of ``Y`` (``X = a, Y = b``
with ``h`` injective for a sub-automaton; ``X = b, Y = a`` with ``h`` onto for
a quotient).  Checks and searches run over the union of both dependency
supports, which is exact because neither rule reads the other offsets.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import Automaton, CAError

log = logging.getLogger(__name__)

# exhaustive checks above this many windows fall back to sampling
CHECK_LIMIT = 1 << 26
SAMPLE_WINDOWS = 1 << 16
STABLE_SUBSET_GUARD = 20
FILTER_WINDOWS = 1 << 8
SRC_TABLE_LIMIT = 1 << 22
# a node budget also caps evaluated windows at this many per node
WORK_PER_NODE = 1 << 8

INJECTION = "injection"
SURJECTION = "surjection"
BIJECTION = "bijection"


class MorphismError(CAError):
    pass


class SearchBudgetExceeded(CAError):
    pass


@dataclass(frozen=True)
class StateMap:
    source_count: int
    target_count: int
    table: tuple
    role: str

    def __post_init__(self):
        table = tuple(int(x) for x in self.table)
        object.__setattr__(self, "table", table)
        if len(table) != self.source_count:
            raise MorphismError("map table length differs from the source state count")
        if any(t < 0 or t >= self.target_count for t in table):
            raise MorphismError("map entry outside the target states")
        injective = len(set(table)) == len(table)
        onto = len(set(table)) == self.target_count
        if self.role == INJECTION and not injective:
            raise MorphismError("injection role on a non-injective map")
        if self.role == SURJECTION and not onto:
            raise MorphismError("surjection role on a map that is not onto")
        if self.role == BIJECTION and not (injective and onto):
            raise MorphismError("bijection role on a non-bijective map")
        if self.role not in (INJECTION, SURJECTION, BIJECTION):
            raise MorphismError(f"unknown role {self.role!r}")

    @classmethod
    def parse(cls, text: str, target_count: int, role: str) -> "StateMap":
        """Parse ``map <k>: t0 t1 ...``."""
        head, sep, body = text.partition(":")
        words = head.split()
        if not sep or len(words) != 2 or words[0] != "map":
            raise MorphismError("map literal must look like 'map <k>: t0 t1 ...'")
        table = tuple(int(x) for x in body.split())
        if len(table) != int(words[1]):
            raise MorphismError("map literal length mismatch")
        return cls(len(table), target_count, table, role)

    def __str__(self) -> str:
        return f"map {self.source_count}: " + " ".join(map(str, self.table))

    def __call__(self, x: int) -> int:
        return self.table[x]

    def array(self) -> np.ndarray:
        return np.array(self.table, dtype=np.int64)

    def then(self, other: "StateMap") -> "StateMap":
        """Composition: apply ``self`` first, then ``other``."""
        if other.source_count != self.target_count:
            raise MorphismError("maps do not compose")
        table = tuple(other.table[x] for x in self.table)
        roles = {self.role, other.role}
        if roles <= {INJECTION, BIJECTION}:
            role = BIJECTION if roles == {BIJECTION} else INJECTION
        elif roles <= {SURJECTION, BIJECTION}:
            role = BIJECTION if roles == {BIJECTION} else SURJECTION
        else:
            raise MorphismError("composing an injection with a surjection has no fixed role")
        return StateMap(self.source_count, other.target_count, table, role)

    def inverse(self) -> "StateMap":
        if self.role != BIJECTION:
            raise MorphismError("only bijections have inverses")
        inv = [0] * self.source_count
        for x, y in enumerate(self.table):
            inv[y] = x
        return StateMap(self.target_count, self.source_count, tuple(inv), BIJECTION)


def identity_map(n: int) -> StateMap:
    return StateMap(n, n, tuple(range(n)), BIJECTION)


@dataclass(frozen=True)
class MorphismCheck:
    holds: bool
    exhaustive: bool
    windows: int
    counterexample: tuple | None = None

    def __bool__(self) -> bool:
        return self.holds


class _Frame:
    """Shared geometry of two automata compared at a common radius."""

    def __init__(self, src: Automaton, dst: Automaton):
        self.src, self.dst = src, dst
        self.R = max(src.radius, dst.radius)
        self.offsets = sorted(src.support | dst.support)
        self.cols = np.array([o + self.R for o in self.offsets], dtype=np.int64)

    @property
    def k(self) -> int:
        return len(self.offsets)

    def full(self, short: np.ndarray) -> np.ndarray:
        out = np.zeros((short.shape[0], 2 * self.R + 1), dtype=np.int64)
        out[:, self.cols] = short
        return out

    def src_out(self, short: np.ndarray) -> np.ndarray:
        return self.src.central(self.full(short), self.R)

    def dst_out(self, short: np.ndarray) -> np.ndarray:
        return self.dst.central(self.full(short), self.R)


def _product(values: Sequence[int], k: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64)
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*([values] * k), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _commutes(src: Automaton, dst: Automaton, h: np.ndarray, seed: int = 0) -> MorphismCheck:
    fr = _Frame(src, dst)
    count = src.states ** fr.k
    exhaustive = count <= CHECK_LIMIT
    if exhaustive:
        chunks = _window_chunks(src.states, fr.k)
    else:
        rng = np.random.default_rng(seed)
        chunks = [rng.integers(0, src.states, size=(SAMPLE_WINDOWS, fr.k))]
        log.info("sampled commutation check: %d of %d windows", SAMPLE_WINDOWS, count)
    seen = 0
    for short in chunks:
        seen += short.shape[0]
        left = h[fr.src_out(short)]
        right = fr.dst_out(h[short])
        bad = np.nonzero(left != right)[0]
        if bad.size:
            window = fr.full(short[bad[:1]])[0]
            return MorphismCheck(False, exhaustive, seen, tuple(window.tolist()))
    return MorphismCheck(True, exhaustive, seen)


def _window_chunks(n: int, k: int, chunk: int = 1 << 18):
    total = n**k
    powers = np.array([n ** (k - 1 - i) for i in range(k)], dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        yield (idx[:, None] // powers[None, :]) % n


def check_subautomaton(a: Automaton, b: Automaton, iota: StateMap) -> MorphismCheck:
    """Does ``iota`` witness ``a`` as a sub-automaton of ``b``?"""
    if iota.role not in (INJECTION, BIJECTION):
        raise MorphismError("a sub-automaton witness must be injective")
    if iota.source_count != a.states or iota.target_count != b.states:
        raise MorphismError("witness does not map the states of a into those of b")
    return _commutes(a, b, iota.array())


def check_quotient(a: Automaton, b: Automaton, pi: StateMap) -> MorphismCheck:
    """Does ``pi`` (from the states of ``b`` onto those of ``a``) witness a quotient?"""
    if pi.role not in (SURJECTION, BIJECTION):
        raise MorphismError("a quotient witness must be onto")
    if pi.source_count != b.states or pi.target_count != a.states:
        raise MorphismError("witness does not map the states of b onto those of a")
    return _commutes(b, a, pi.array())


# -- search -------------------------------------------------------------------


class _Conflict(Exception):
    pass


class _MapSearch:
    """Backtracking over maps ``h: src -> dst`` with forced-value propagation.

    Variables are assigned in increasing order and values tried in increasing
    order, so the first complete map found is the lexicographically least.
    """

    def __init__(self, src: Automaton, dst: Automaton, kind: str, budget: int | None):
        self.fr = _Frame(src, dst)
        self.ns, self.nd = src.states, dst.states
        self.kind = kind
        self.budget = budget
        self.nodes = 0
        self.work = 0
        self.work_budget = None if budget is None else budget * WORK_PER_NODE
        self.src_table = None
        k = self.fr.k
        if self.ns**k <= SRC_TABLE_LIMIT:
            self.src_powers = np.array([self.ns ** (k - 1 - i) for i in range(k)], dtype=np.int64)
            self.src_table = np.concatenate(
                [self.fr.src_out(w) for w in _window_chunks(self.ns, k)]
            ) if k else self.fr.src_out(np.zeros((1, 0), dtype=np.int64))

    def run(self) -> tuple | None:
        h = np.full(self.ns, -1, dtype=np.int64)
        used = np.zeros(self.nd, dtype=bool)
        return self._dfs(h, used)

    # windows over assigned states that contain ``j``
    def _windows_with(self, assigned: np.ndarray, j: int) -> np.ndarray:
        k = self.fr.k
        if k == 0:
            return np.zeros((0, 0), dtype=np.int64)
        others = assigned[assigned != j]
        parts = []
        for p in range(k):
            cols = [others] * p + [np.array([j])] + [np.append(others, j)] * (k - p - 1)
            grids = np.meshgrid(*cols, indexing="ij")
            parts.append(np.stack([g.ravel() for g in grids], axis=1))
        return np.concatenate(parts)

    def _propagate(self, h, used, queue):
        while queue:
            pending = np.unique(np.array(queue, dtype=np.int64))
            queue.clear()
            assigned = np.nonzero(h >= 0)[0]
            others = np.setdiff1d(assigned, pending)
            # growing stages so that most conflicts surface on few windows
            p = 1
            while True:
                W = self._windows_with_any(others[:p], pending)
                self._check_windows(h, used, queue, W)
                if p >= others.size:
                    break
                p *= 4

    def _windows_with_any(self, rest: np.ndarray, marked: np.ndarray) -> np.ndarray:
        """Windows over ``rest | marked`` containing at least one marked state."""
        k = self.fr.k
        if k == 0:
            return np.zeros((0, 0), dtype=np.int64)
        both = np.concatenate([rest, marked])
        parts = []
        for p in range(k):
            cols = [rest] * p + [marked] + [both] * (k - p - 1)
            if any(c.size == 0 for c in cols):
                continue
            grids = np.meshgrid(*cols, indexing="ij")
            parts.append(np.stack([g.ravel() for g in grids], axis=1))
        if not parts:
            return np.zeros((0, k), dtype=np.int64)
        return np.concatenate(parts)

    def _check_windows(self, h, used, queue, W):
        if W.shape[0] == 0:
            return
        self._spend(W.shape[0])
        a = self._src_out(W)
        b = self.fr.dst_out(h[W])
        known = h[a] >= 0
        if (h[a[known]] != b[known]).any():
            raise _Conflict
        if known.all():
            return
        fa, fb = a[~known], b[~known]
        order = np.argsort(fa, kind="stable")
        fa, fb = fa[order], fb[order]
        firsts = np.r_[True, fa[1:] != fa[:-1]]
        ua, ub = fa[firsts], fb[firsts]
        grp = np.cumsum(firsts) - 1
        if (fb != ub[grp]).any():
            raise _Conflict
        for x, y in zip(ua.tolist(), ub.tolist()):
            if self.kind != SURJECTION:
                if used[y]:
                    raise _Conflict
                used[y] = True
            h[x] = y
            queue.append(x)
        self._check_onto_feasible(h, used)

    def _spend(self, windows: int):
        self.work += windows
        if self.work_budget is not None and self.work > self.work_budget:
            raise SearchBudgetExceeded(f"map search exceeded {self.work_budget} window evaluations")

    def _src_out(self, W):
        if self.src_table is None:
            return self.fr.src_out(W)
        return self.src_table[W @ self.src_powers]

    def _check_onto_feasible(self, h, used):
        if self.kind == SURJECTION:
            hit = np.zeros(self.nd, dtype=bool)
            hit[h[h >= 0]] = True
            if (~hit).sum() > (h < 0).sum():
                raise _Conflict

    def _candidates(self, h, used, j) -> list:
        vals = np.arange(self.nd)
        if self.kind != SURJECTION:
            vals = vals[~used]
        if vals.size == 0:
            return []
        # a necessary filter: windows over j and a few assigned states
        # (propagation performs the full check afterwards)
        k = self.fr.k
        cap = 1
        while k * (cap + 2) ** max(k - 1, 0) <= FILTER_WINDOWS and cap < self.ns:
            cap += 1
        assigned = np.append(np.nonzero(h >= 0)[0][:cap], j)
        W = self._windows_with(assigned, j)
        if W.shape[0] == 0:
            return vals.tolist()
        a = self._src_out(W)
        checkable = (h[a] >= 0) | (a == j)
        W, a = W[checkable], a[checkable]
        if W.shape[0] == 0:
            return vals.tolist()
        self._spend(W.shape[0] * vals.size)
        keep = np.ones(vals.size, dtype=bool)
        per = max(1, (1 << 18) // max(1, W.shape[0]))
        for start in range(0, vals.size, per):
            cand = vals[start:start + per]
            C = cand.size
            hv = np.broadcast_to(h, (C, self.ns)).copy()
            hv[:, j] = cand
            mapped = np.take_along_axis(hv, np.broadcast_to(W.reshape(1, -1), (C, W.size)), axis=1)
            mapped = mapped.reshape(C * W.shape[0], self.fr.k)
            out = self.fr.dst_out(mapped).reshape(C, W.shape[0])
            want = np.take_along_axis(hv, np.broadcast_to(a.reshape(1, -1), (C, a.size)), axis=1)
            keep[start:start + per] = (out == want).all(axis=1)
        return vals[keep].tolist()

    def _dfs(self, h, used):
        free = np.nonzero(h < 0)[0]
        if free.size == 0:
            if self.kind in (SURJECTION, BIJECTION):
                if np.unique(h).size != self.nd:
                    return None
            return tuple(h.tolist())
        j = int(free[0])
        for v in self._candidates(h, used, j):
            self.nodes += 1
            if self.budget is not None and self.nodes > self.budget:
                raise SearchBudgetExceeded(f"map search exceeded {self.budget} nodes")
            h2, used2 = h.copy(), used.copy()
            h2[j] = v
            if self.kind != SURJECTION:
                used2[v] = True
            try:
                self._check_onto_feasible(h2, used2)
                self._propagate(h2, used2, [j])
            except _Conflict:
                continue
            found = self._dfs(h2, used2)
            if found is not None:
                return found
        return None


def search_map(src: Automaton, dst: Automaton, kind: str, budget: int | None = None) -> tuple | None:
    """Least map ``h`` (as a tuple) with ``h . f_src = f_dst . h`` of the given kind."""
    if kind in (INJECTION, BIJECTION) and src.states > dst.states:
        return None
    if kind in (SURJECTION, BIJECTION) and src.states < dst.states:
        return None
    return _MapSearch(src, dst, kind, budget).run()


def find_subautomaton(a: Automaton, b: Automaton, budget: int | None = None) -> StateMap | None:
    if a.states > b.states:
        return None
    found = search_map(a, b, INJECTION, budget)
    if found is None:
        return None
    return StateMap(a.states, b.states, found, INJECTION)


def find_quotient(a: Automaton, b: Automaton, budget: int | None = None) -> StateMap | None:
    if a.states > b.states:
        return None
    found = search_map(b, a, SURJECTION, budget)
    if found is None:
        return None
    return StateMap(b.states, a.states, found, SURJECTION)


def find_isomorphism(a: Automaton, b: Automaton, budget: int | None = None) -> StateMap | None:
    if a.states != b.states:
        return None
    found = search_map(a, b, BIJECTION, budget)
    if found is None:
        return None
    m = StateMap(a.states, b.states, found, BIJECTION)
    if not check_subautomaton(b, a, m.inverse()):
        return None
    return m


# -- stable subsets and the mixed relation ------------------------------------


def closure(b: Automaton, seed: Iterable[int]) -> frozenset:
    """Smallest set of states containing ``seed`` and closed under the rule."""
    cur = set(int(x) for x in seed)
    if not cur:
        return frozenset()
    sup = sorted(b.support)
    cols = np.array([o + b.radius for o in sup], dtype=np.int64)
    done: set = set()
    while True:
        new = cur - done
        if not new:
            return frozenset(cur)
        vals = np.array(sorted(cur), dtype=np.int64)
        fresh = np.array(sorted(new), dtype=np.int64)
        # windows over cur with at least one fresh state
        k = len(sup)
        if k == 0:
            win = np.zeros((1, 0), dtype=np.int64)
        else:
            parts = []
            old = np.array(sorted(done), dtype=np.int64)
            for p in range(k):
                grids = np.meshgrid(*([old] * p + [fresh] + [vals] * (k - p - 1)), indexing="ij")
                parts.append(np.stack([g.ravel() for g in grids], axis=1))
            win = np.concatenate(parts)
        full = np.zeros((win.shape[0], b.width), dtype=np.int64)
        full[:, cols] = win
        if k == 0:
            full[:, :] = vals[0]
        out = set(np.unique(b.evaluate(full)).tolist()) if full.shape[0] else set()
        done |= new
        cur |= out


def stable_subsets(b: Automaton, max_subsets: int | None = None) -> list:
    """Every non-empty stable set of states, ordered by size then lexicographically.

    Without ``max_subsets`` the state count is limited to 20; with it the
    enumeration stops (raising ``SearchBudgetExceeded``) once that many sets
    have been produced.
    """
    if max_subsets is None and b.states > STABLE_SUBSET_GUARD:
        raise CAError(
            f"{b.states} states exceeds the {STABLE_SUBSET_GUARD}-state guard; "
            "pass max_subsets to bound the enumeration"
        )
    found = set()
    frontier = []
    for x in range(b.states):
        c = closure(b, [x])
        if c not in found:
            found.add(c)
            frontier.append(c)
        if max_subsets is not None and len(found) > max_subsets:
            raise SearchBudgetExceeded(f"more than {max_subsets} stable subsets")
    while frontier:
        nxt = []
        for X in frontier:
            for y in range(b.states):
                if y in X:
                    continue
                c = closure(b, X | {y})
                if c not in found:
                    found.add(c)
                    nxt.append(c)
                    if max_subsets is not None and len(found) > max_subsets:
                        raise SearchBudgetExceeded(f"more than {max_subsets} stable subsets")
        frontier = nxt
    return [tuple(sorted(s)) for s in sorted(found, key=lambda s: (len(s), sorted(s)))]


def restrict(b: Automaton, subset: Sequence[int]) -> Automaton:
    """``b`` restricted to a stable subset, states renumbered in increasing order."""
    subset = np.array(sorted(subset), dtype=np.int64)
    back = np.full(b.states, -1, dtype=np.int64)
    back[subset] = np.arange(subset.size)

    def func(windows):
        out = back[b.evaluate(subset[windows])]
        if (out < 0).any():
            raise CAError("subset is not stable")
        return out

    return Automaton.lazy(int(subset.size), b.radius, func, label=f"{b.label}|Q", support=b.support)


@dataclass(frozen=True)
class MixedWitness:
    subset: tuple
    map: StateMap

    def __str__(self) -> str:
        return "subset " + " ".join(map(str, self.subset)) + f"; {self.map}"


def check_mixed(a: Automaton, b: Automaton, w: MixedWitness) -> MorphismCheck:
    if closure(b, w.subset) != frozenset(w.subset):
        return MorphismCheck(False, True, 0)
    return check_quotient(a, restrict(b, w.subset), w.map)


def find_mixed(
    a: Automaton,
    b: Automaton,
    budget: int | None = None,
    max_subsets: int | None = None,
    subset_filter=None,
) -> MixedWitness | None:
    """First stable subset of ``b`` (by size, then lexicographically) admitting a quotient onto ``a``."""
    for Q in stable_subsets(b, max_subsets):
        if len(Q) < a.states:
            continue
        if subset_filter is not None and not subset_filter(Q):
            continue
        pi = find_quotient(a, restrict(b, Q), budget)
        if pi is not None:
            return MixedWitness(Q, pi)
    return None


# -- congruence partitions ----------------------------------------------------

PARTITION_GUARD = 9


def restricted_growth_strings(n: int, blocks: int | None = None):
    """Set partitions of ``range(n)`` as restricted growth strings, in lexicographic order."""

    def rec(prefix, top):
        if len(prefix) == n:
            if blocks is None or top + 1 == blocks:
                yield tuple(prefix)
            return
        limit = top + 1 if blocks is None else min(top + 1, blocks - 1)
        if blocks is not None and (top + 1) + (n - len(prefix)) < blocks:
            return
        for v in range(limit + 1):
            yield from rec(prefix + [v], max(top, v))

    if n == 0:
        return
    yield from rec([0], 0)


def is_congruence(b: Automaton, rgs: Sequence[int]) -> bool:
    """Do outputs of ``b`` respect the blocks of the partition ``rgs``?"""
    cls = np.asarray(rgs, dtype=np.int64)
    k = int(cls.max()) + 1
    fr = _Frame(b, b)
    seen = np.full(k**fr.k, -1, dtype=np.int64)  # class of the output per class-window
    powers = k ** np.arange(fr.k - 1, -1, -1, dtype=np.int64)
    for short in _window_chunks(b.states, fr.k):
        keys = cls[short] @ powers
        out = cls[fr.src_out(short)]
        first = np.full(seen.size, -1, dtype=np.int64)
        first[keys] = out
        if (first[keys] != out).any():
            return False
        fresh = seen == -1
        if ((first != seen) & (first >= 0) & ~fresh).any():
            return False
        seen = np.where(fresh, first, seen)
    return True


def congruences(b: Automaton, blocks: int | None = None) -> list:
    """Every congruence partition of the states of ``b`` (optionally with a fixed block count)."""
    if b.states > PARTITION_GUARD:
        raise CAError(f"partition enumeration is limited to {PARTITION_GUARD} states")
    return [p for p in restricted_growth_strings(b.states, blocks) if is_congruence(b, p)]


def quotient_automaton(b: Automaton, rgs: Sequence[int]) -> Automaton:
    """The automaton induced on the blocks of a congruence."""
    cls = np.asarray(rgs, dtype=np.int64)
    k = int(cls.max()) + 1
    rep = np.array([int(np.nonzero(cls == i)[0][0]) for i in range(k)], dtype=np.int64)

    def func(windows):
        return cls[b.evaluate(rep[windows])]

    return Automaton.lazy(k, b.radius, func, label=f"{b.label}/~", support=b.support)
