"""Command-line front end.

Exit codes: 0 success or a holding relation, 1 usage or input error,
2 when a relation is not established (unknown, or refuted by an exhaustive
check).
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import zoo
from .cafile import format_ca, parse_ca, write_ca
from .core import Automaton, CAError, PeriodicConfig, minimal_neighborhood
from .diagram import render_ascii, render_pgm, render_png, run
from .morphism import (
    INJECTION,
    SURJECTION,
    MixedWitness,
    StateMap,
    check_mixed,
    check_quotient,
    check_subautomaton,
    find_mixed,
    find_quotient,
    find_subautomaton,
)
from .properties import (
    is_balanced,
    is_captive,
    is_injective,
    is_lr_permutative,
    is_surjective,
    nilpotent_over_periodic,
    quiescent_states,
    spreading_states,
)
from .simsearch import SearchBounds, search
from .transform import Transform, apply_transform

EXIT_OK, EXIT_USAGE, EXIT_UNKNOWN = 0, 1, 2


class Report:
    """Human lines, or ``key=value`` records under ``--porcelain``."""

    def __init__(self, porcelain: bool, out=None):
        self.porcelain = porcelain
        self.out = out or sys.stdout

    def record(self, human: str, **fields):
        if self.porcelain:
            self.out.write(" ".join(f"{k}={_value(v)}" for k, v in fields.items()) + "\n")
        else:
            self.out.write(human + "\n")


def _value(v) -> str:
    if isinstance(v, (set, frozenset, list, tuple)):
        return ",".join(str(x) for x in sorted(v)) if isinstance(v, (set, frozenset)) else ",".join(map(str, v))
    if v is None:
        return "-"
    text = str(v)
    return f'"{text}"' if any(ch.isspace() for ch in text) else text


# -- make ----------------------------------------------------------------------


def _ints(params, count, name):
    if len(params) != count:
        raise CAError(f"{name} takes {count} integer parameter(s)")
    try:
        return [int(p) for p in params]
    except ValueError:
        raise CAError(f"{name} parameters must be integers") from None


def _make_shiftprod(params):
    vals = [int(p) for p in params]
    if not vals or len(vals) % 2:
        raise CAError("shiftprod takes pairs: n1 z1 n2 z2 ...")
    return zoo.shift_product(zoo.ShiftProduct(tuple(zip(vals[::2], vals[1::2]))))


def _make_random(params):
    import numpy as np

    n, r, seed = _ints(params, 3, "random")
    return zoo.random_rule(n, r, np.random.default_rng(seed))


def _from_file(build):
    def make(params):
        if len(params) != 1:
            raise CAError("expects one CA file")
        return build(parse_ca(params[0]))

    return make


MAKERS = {
    "additive": lambda p: zoo.additive(*_ints(p, 1, "additive")),
    "shift": lambda p: zoo.shift(*_ints(p, 2, "shift")),
    "identity": lambda p: zoo.identity(*_ints(p, 1, "identity")),
    "max": lambda p: zoo.delta_max(*_ints(p, 1, "max")),
    "constant": lambda p: zoo.constant(*_ints(p, 2, "constant")),
    "bottom": lambda p: (_ints(p, 0, "bottom"), zoo.bottom())[1],
    "elementary": lambda p: zoo.elementary(*_ints(p, 1, "elementary")),
    "random": _make_random,
    "shiftprod": _make_shiftprod,
    "gadget": lambda p: zoo.nontransitivity_gadget(*_ints(p, 1, "gadget"))[0],
    "gadget-quotient": lambda p: (_ints(p, 0, "gadget-quotient"), zoo.gadget_quotient())[1],
    "parity-big": lambda p: (_ints(p, 0, "parity-big"), zoo.parity_range_pair()[0])[1],
    "parity-small": lambda p: (_ints(p, 0, "parity-small"), zoo.parity_range_pair()[1])[1],
    "tm-incrementer": lambda p: (_ints(p, 0, "tm-incrementer"), zoo.tm_embed(zoo.unary_incrementer()))[1],
    "encode-two-state": _from_file(zoo.encode_two_state),
    "encode-captive": _from_file(zoo.encode_captive),
    "encode-equipt": _from_file(zoo.encode_equipt),
    "encode-sensi": _from_file(zoo.encode_sensi),
}


def cmd_make(args, rep: Report) -> int:
    if args.name not in MAKERS:
        raise CAError(f"unknown constructor {args.name!r}; choose from {', '.join(sorted(MAKERS))}")
    a = MAKERS[args.name](args.params)
    text = format_ca(a)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        rep.record(f"wrote {args.output}: {a.states} states, radius {a.radius}",
                   path=args.output, states=a.states, radius=a.radius)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- run -----------------------------------------------------------------------


def parse_config(text: str, states: int) -> PeriodicConfig:
    """``"L : s0 s1 ..."``, space separated symbols, or a digit string."""
    if ":" in text:
        return PeriodicConfig.parse(text, states)
    toks = text.split()
    if len(toks) == 1:
        if states > 10:
            raise CAError("digit strings only work up to 10 states; use 'L : s0 s1 ...'")
        toks = list(toks[0])
    try:
        return PeriodicConfig.of(states, [int(t) for t in toks])
    except ValueError:
        raise CAError(f"bad configuration {text!r}") from None


def cmd_run(args, rep: Report) -> int:
    a = parse_ca(args.ca)
    c = parse_config(args.config, a.states)
    d = run(a, c, args.steps, args.replicate)
    if args.pgm:
        render_pgm(d, args.pgm, args.time_up)
    if args.png:
        render_png(d, args.png, args.time_up)
    if args.ascii or not (args.pgm or args.png):
        sys.stdout.write(render_ascii(d, args.time_up))
    for path in (args.pgm, args.png):
        if path:
            rep.record(f"wrote {path}: {d.width}x{d.height}", path=path, width=d.width, height=d.height)
    return EXIT_OK


# -- props ---------------------------------------------------------------------


def cmd_props(args, rep: Report) -> int:
    a = parse_ca(args.ca)
    lines = []
    local = a.materializable
    if local:
        lines.append(("balanced", "holds" if is_balanced(a) else "fails", None))
        lines.append(("lr-permutative", "holds" if is_lr_permutative(a) else "fails", None))
        lines.append(("quiescent", "-", sorted(quiescent_states(a))))
        lines.append(("spreading", "-", sorted(spreading_states(a))))
    lines.append(("captive", "holds" if is_captive(a) else "fails", None))
    for name, v in (
        ("surjective", is_surjective(a)),
        ("injective", is_injective(a)),
        ("nilpotent", nilpotent_over_periodic(a, args.max_period, args.max_time)),
    ):
        lines.append((name, v.status, v.witness if v.witness is not None else (v.note or None)))
    for name, status, witness in lines:
        wtxt = "" if witness is None else (" " + _witness_text(witness))
        rep.record(f"{name} {status}{wtxt}", analyzer=name, verdict=status, witness=_witness_text(witness))
    return EXIT_OK


def _witness_text(w) -> str:
    if w is None:
        return "-"
    if isinstance(w, list):
        return "{" + ",".join(map(str, w)) + "}"
    if isinstance(w, tuple) and all(isinstance(x, int) for x in w):
        return "".join(map(str, w)) if all(x < 10 for x in w) else " ".join(map(str, w))
    if isinstance(w, tuple):
        return " | ".join(_cycle_text(x) if isinstance(x, tuple) else str(x) for x in w)
    return str(w)


def _cycle_text(cycle) -> str:
    return "[" + " -> ".join(str(c) for c in cycle) + "]"


# -- check ---------------------------------------------------------------------


def cmd_check(args, rep: Report) -> int:
    a, b = parse_ca(args.a), parse_ca(args.b)
    subset = tuple(int(x) for x in args.subset.split(",")) if args.subset else None
    if args.rel == "sub":
        if args.map:
            m = StateMap.parse(args.map, b.states, INJECTION)
            holds, exact = bool(r := check_subautomaton(a, b, m)), r.exhaustive
        else:
            m = find_subautomaton(a, b)
            holds, exact = m is not None, True
    elif args.rel == "quot":
        if args.map:
            m = StateMap.parse(args.map, a.states, SURJECTION)
            holds, exact = bool(r := check_quotient(a, b, m)), r.exhaustive
        else:
            m = find_quotient(a, b)
            holds, exact = m is not None, True
    else:
        if args.map:
            if subset is None:
                raise CAError("an explicit mixed map needs --subset")
            m = StateMap.parse(args.map, a.states, SURJECTION)
            w = MixedWitness(subset, m)
            holds, exact = bool(r := check_mixed(a, b, w)), r.exhaustive
        else:
            w = find_mixed(a, b)
            holds, exact = w is not None, True
            m = w.map if w else None
            subset = w.subset if w else None
    status = "holds" if holds else ("fails" if exact else "unknown")
    human = f"{args.rel} {status}"
    if holds and subset is not None:
        human += " subset " + " ".join(map(str, subset))
    if holds and m is not None:
        human += f"; {m}"
    rep.record(human, relation=args.rel, verdict=status, exhaustive=exact,
               subset=subset if subset is not None else None, map=str(m) if (holds and m) else None)
    return EXIT_OK if holds else EXIT_UNKNOWN


# -- search --------------------------------------------------------------------


def cmd_search(args, rep: Report) -> int:
    a, b = parse_ca(args.a), parse_ca(args.b)
    bounds = SearchBounds(args.max_m, args.max_T, args.max_shift, args.max_group, args.mirror)
    v = search(args.rel, a, b, bounds, strong=args.strong, workers=args.workers)
    if v.holds:
        w = v.witness
        rep.record(f"holds {w}", verdict="holds", relation=w.relation, alpha=w.alpha, t=w.group_t,
                   subset=w.subset, map=str(w.map))
        return EXIT_OK
    rep.record(f"unknown ({v.note})", verdict="unknown", pruned=_pruned(v.details.get("pruned", {})),
               skipped=len(v.details.get("skipped", [])))
    for line in v.details.get("skipped", []):
        rep.record(f"  skipped {line}", skipped_cell=line)
    return EXIT_UNKNOWN


def _pruned(d: dict) -> str:
    return ",".join(f"{k}:{v}" for k, v in sorted(d.items())) or "-"


# -- transform / info -------------------------------------------------------------


def cmd_transform(args, rep: Report) -> int:
    a = parse_ca(args.ca)
    t = Transform.parse(args.alpha)
    out = apply_transform(a, t)
    if args.output:
        write_ca(out, args.output)
        rep.record(f"wrote {args.output}: {out.states} states, radius {out.radius}",
                   path=args.output, states=out.states, radius=out.radius)
    else:
        sys.stdout.write(format_ca(out))
    return EXIT_OK


def cmd_info(args, rep: Report) -> int:
    a = parse_ca(args.ca)
    exact = a.materializable
    # lazy rules report their declared support, a superset of the true one
    hood = sorted(minimal_neighborhood(a) if exact else a.support)
    rep.record(f"states {a.states}", states=a.states)
    rep.record(f"radius {a.radius}", radius=a.radius)
    rep.record("neighborhood " + " ".join(map(str, hood)) + ("" if exact else " (declared)"),
               neighborhood=hood, exact=exact)
    for k, v in sorted(_meta(a).items()):
        rep.record(f"{k} {v}", **{k: v})
    return EXIT_OK


def _meta(a: Automaton) -> dict:
    out = {}
    sp = a.meta.get("shiftprod")
    if sp is not None:
        out["shiftprod"] = str(sp)
        out["level"] = zoo.shift_product_level(sp)
        if len(sp.vectors) >= 3:
            out["characteristic"] = " ".join(str(q) for q in zoo.characteristic_sequence(sp))
    return out


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bulkca", description="Bulking toolkit for one-dimensional cellular automata.")
    p.add_argument("--porcelain", action="store_true", help="emit key=value records")
    p.add_argument("-v", "--verbose", action="store_true", help="log search progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("make", help="build a zoo automaton and write it as a CA file")
    s.add_argument("name", help="constructor: " + ", ".join(sorted(MAKERS)))
    s.add_argument("params", nargs="*")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_make)

    s = sub.add_parser("run", help="render a space-time diagram")
    s.add_argument("ca")
    s.add_argument("--config", required=True, help="'L : s0 s1 ...' or a digit string such as 0001000")
    s.add_argument("--steps", type=int, default=16)
    s.add_argument("--replicate", type=int, default=1)
    s.add_argument("--pgm", help="write a binary graymap")
    s.add_argument("--png", help="write a PNG through matplotlib")
    s.add_argument("--ascii", action="store_true", help="print glyphs even when writing images")
    s.add_argument("--time-up", action="store_true", help="time runs upward")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("props", help="run the property analyzers")
    s.add_argument("ca")
    s.add_argument("--max-period", type=int, default=4)
    s.add_argument("--max-time", type=int, default=16)
    s.set_defaults(func=cmd_props)

    s = sub.add_parser("check", help="direct sub-automaton, quotient or mixed relation")
    s.add_argument("--rel", choices=("sub", "quot", "mixed"), required=True)
    s.add_argument("--map", help="explicit witness 'map k: t0 t1 ...'")
    s.add_argument("--subset", help="comma separated stable subset of B (mixed)")
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("search", help="bounded simulation search")
    s.add_argument("--rel", choices=("inj", "surj", "mixed"), required=True)
    s.add_argument("--strong", action="store_true")
    s.add_argument("--max-m", type=int, default=2)
    s.add_argument("--max-T", type=int, default=2)
    s.add_argument("--max-shift", type=int, default=1)
    s.add_argument("--max-group", type=int, default=2)
    s.add_argument("--mirror", action="store_true")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("transform", help="apply a bulk transform m:T:s (prefix ~ to mirror)")
    s.add_argument("ca")
    s.add_argument("alpha")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_transform)

    s = sub.add_parser("info", help="state count, radius, neighborhood, metadata")
    s.add_argument("ca")
    s.set_defaults(func=cmd_info)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    rep = Report(args.porcelain)
    try:
        return args.func(args, rep)
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"bulkca: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
