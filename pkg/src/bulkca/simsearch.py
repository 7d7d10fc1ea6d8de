"""Bounded search for simulations in the one-sided normal form.

A simulation of ``a`` by ``b`` is searched as a local relation between
``apply_transform(a, alpha)`` and the grouping ``b^[t]``.  Cells of the
``(t, alpha)`` grid are visited in the canonical order
``(t, m, T, |s|, s, tau)`` (``tau = +1`` first) and the first cell with a
witness wins, so the reported witness does not depend on the worker count.
"""
from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .core import Automaton, CAError
from .morphism import (
    MixedWitness,
    SearchBudgetExceeded,
    StateMap,
    _Frame,
    check_mixed,
    check_quotient,
    check_subautomaton,
    find_quotient,
    find_subautomaton,
    restrict,
    stable_subsets,
)
from .properties import HOLDS, UNKNOWN, Verdict, is_lr_permutative, quiescent_states
from .transform import TRIVIAL, Transform, apply_transform, grouping

log = logging.getLogger(__name__)

INJ, SURJ, MIXED = "inj", "surj", "mixed"
RELATIONS = (INJ, SURJ, MIXED)
WINDOW_CUTOFF = 1 << 26
NODE_BUDGET = 50_000
SUBSET_BUDGET = 1 << 12


@dataclass(frozen=True)
class SearchBounds:
    max_m: int = 2
    max_T: int = 2
    max_shift: int = 1
    max_group: int = 2
    allow_mirror: bool = False

    def __post_init__(self):
        for name in ("max_m", "max_T", "max_group"):
            if getattr(self, name) < 1:
                raise CAError(f"{name} must be at least 1")
        if self.max_shift < 0:
            raise CAError("max_shift must be non-negative")


@dataclass(frozen=True)
class SimulationWitness:
    relation: str
    alpha: Transform
    group_t: int
    map: StateMap
    subset: tuple | None = None

    def __str__(self) -> str:
        head = f"{self.relation} alpha={self.alpha} t={self.group_t}"
        if self.subset is not None:
            head += " subset=" + ",".join(map(str, self.subset))
        return f"{head} {self.map}"


def transforms(bounds: SearchBounds, strong: bool = False):
    """The simulated-side transforms in canonical order."""
    if strong:
        yield TRIVIAL
        return
    shifts = [0]
    for k in range(1, bounds.max_shift + 1):
        shifts += [-k, k]
    taus = (1, -1) if bounds.allow_mirror else (1,)
    for m in range(1, bounds.max_m + 1):
        for T in range(1, bounds.max_T + 1):
            for s in shifts:
                for tau in taus:
                    yield Transform(m, tau, T, s)


@dataclass
class _Cell:
    t: int
    alpha: Transform
    witness: SimulationWitness | None = None
    pruned: str | None = None
    skipped: str | None = None


@dataclass
class _Context:
    rel: str
    a: Automaton
    b: Automaton
    b_perm: bool | None
    budget: int
    groups: dict = field(default_factory=dict)
    transformed: dict = field(default_factory=dict)

    def group(self, t: int) -> Automaton:
        if t not in self.groups:
            self.groups[t] = grouping(self.b, t) if t > 1 else self.b
        return self.groups[t]

    def source(self, alpha: Transform) -> Automaton:
        if alpha not in self.transformed:
            self.transformed[alpha] = apply_transform(self.a, alpha)
        return self.transformed[alpha]

    def group_permutative(self, t: int) -> bool:
        # grouping keeps LR-permutativity for radius >= 1
        if t == 1 or self.b.radius == 0:
            return bool(self.b_perm) if t == 1 else False
        return bool(self.b_perm) and self.group(t).radius == self.b.radius


def _lr_perm(b: Automaton) -> bool | None:
    if not b.materializable:
        return None
    return is_lr_permutative(b)


def _run_cell(ctx: _Context, cell: _Cell) -> _Cell:
    A = ctx.source(cell.alpha)
    B = ctx.group(cell.t)
    na, nb = A.states, B.states
    if na > nb:
        cell.pruned = "state-count"
        return cell
    perm = ctx.rel in (SURJ, MIXED) and ctx.group_permutative(cell.t)
    if ctx.rel == SURJ and perm and nb % na:
        cell.pruned = "divisibility"
        log.info("divisibility prune: %d does not divide %d (t=%d, alpha=%s)", na, nb, cell.t, cell.alpha)
        return cell
    if ctx.rel == INJ and quiescent_states(A) and not quiescent_states(B):
        cell.pruned = "quiescence"
        return cell
    fr = _Frame(A, B)
    try:
        if ctx.rel == INJ:
            if na ** fr.k > WINDOW_CUTOFF:
                cell.skipped = f"{na}^{fr.k} windows over the cutoff"
                return cell
            iota = find_subautomaton(A, B, ctx.budget)
            if iota is not None:
                cell.witness = SimulationWitness(INJ, cell.alpha, cell.t, iota)
        elif ctx.rel == SURJ:
            if nb ** fr.k > WINDOW_CUTOFF:
                cell.skipped = f"{nb}^{fr.k} windows over the cutoff"
                return cell
            pi = find_quotient(A, B, ctx.budget)
            if pi is not None:
                cell.witness = SimulationWitness(SURJ, cell.alpha, cell.t, pi)
        else:
            subsets = [Q for Q in stable_subsets(B, SUBSET_BUDGET) if len(Q) >= na]
            if perm:
                kept = [Q for Q in subsets if len(Q) % na == 0]
                if not kept:
                    cell.pruned = "divisibility"
                    log.info(
                        "divisibility prune: %d divides no stable subset size of the %d-state grouping "
                        "(t=%d, alpha=%s)", na, nb, cell.t, cell.alpha,
                    )
                    return cell
                subsets = kept
            over = [Q for Q in subsets if len(Q) ** fr.k > WINDOW_CUTOFF]
            for Q in subsets:
                if len(Q) ** fr.k > WINDOW_CUTOFF:
                    continue
                pi = find_quotient(A, restrict(B, Q), ctx.budget)
                if pi is not None:
                    cell.witness = SimulationWitness(MIXED, cell.alpha, cell.t, pi, Q)
                    return cell
            if over:
                cell.skipped = f"{len(over)} stable subsets over the window cutoff"
    except SearchBudgetExceeded as exc:
        cell.skipped = str(exc)
    return cell


def _cells(bounds: SearchBounds, strong: bool):
    for t in range(1, bounds.max_group + 1):
        for alpha in transforms(bounds, strong):
            yield _Cell(t, alpha)


def search(
    rel: str,
    a: Automaton,
    b: Automaton,
    bounds: SearchBounds | None = None,
    strong: bool = False,
    workers: int = 1,
    budget: int = NODE_BUDGET,
) -> Verdict:
    """Holds with the canonical witness, or Unknown with the prune and skip record."""
    if rel not in RELATIONS:
        raise CAError(f"relation must be one of {RELATIONS}")
    bounds = bounds or SearchBounds()
    ctx = _Context(rel, a, b, _lr_perm(b), budget)
    pruned: Counter = Counter()
    skipped = []
    cells = list(_cells(bounds, strong))
    batch = max(1, workers)
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        for start in range(0, len(cells), batch):
            chunk = cells[start:start + batch]
            if pool is None:
                done = [_run_cell(ctx, c) for c in chunk]
            else:
                done = list(pool.map(lambda c: _run_cell(ctx, c), chunk))
            for c in done:
                if c.witness is not None:
                    return Verdict(
                        HOLDS,
                        c.witness,
                        f"found at t={c.t}, alpha={c.alpha}",
                        {"pruned": dict(pruned), "skipped": skipped},
                    )
                if c.pruned:
                    pruned[c.pruned] += 1
                if c.skipped:
                    skipped.append(f"t={c.t} alpha={c.alpha}: {c.skipped}")
    finally:
        if pool is not None:
            pool.shutdown()
    log.info("search %s exhausted: pruned %s, skipped %d cells", rel, dict(pruned), len(skipped))
    note = f"no witness within bounds {bounds}"
    if pruned:
        note += "; pruned " + ", ".join(f"{k}={v}" for k, v in sorted(pruned.items()))
    if skipped:
        note += f"; {len(skipped)} cells skipped"
    return Verdict(UNKNOWN, None, note, {"pruned": dict(pruned), "skipped": skipped})


def search_strong(rel: str, a: Automaton, b: Automaton, bounds: SearchBounds | None = None, **kw) -> Verdict:
    """Search with the simulated-side transform pinned to the trivial one."""
    return search(rel, a, b, bounds, strong=True, **kw)


def verify_witness(w: SimulationWitness, a: Automaton, b: Automaton) -> bool:
    """Rebuild both sides from the witness and re-run the morphism check."""
    try:
        A = apply_transform(a, w.alpha)
        B = grouping(b, w.group_t) if w.group_t > 1 else b
        if w.relation == INJ:
            return bool(check_subautomaton(A, B, w.map))
        if w.relation == SURJ:
            return bool(check_quotient(A, B, w.map))
        if w.relation == MIXED:
            return bool(check_mixed(A, B, MixedWitness(tuple(w.subset), w.map)))
    except CAError:
        return False
    return False
