"""Line-based text format for automata.

    ca v1
    states <n>
    radius <r>
    rule table <n^(2r+1) integers>      (may continue over several lines)
    rule additive <p>
    rule shiftprod <k> <n_1> <z_1> ... <n_k> <z_k>

``#`` starts a comment.  ``write_ca`` keeps shift products in the symbolic
form, followed by a comment block with their level and characteristic
sequence.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import Automaton, CAError
from .zoo import ShiftProduct, additive, characteristic_sequence, shift_product, shift_product_level


class CAFileError(CAError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _tokens(text: str):
    """``(line number, token)`` pairs with comments stripped."""
    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        for tok in body.split():
            yield no, tok


def _int(tok, no, what):
    try:
        return int(tok)
    except ValueError:
        raise CAFileError(f"expected an integer for {what}, got {tok!r}", no) from None


def parse_ca_text(text: str, label: str = "") -> Automaton:
    toks = list(_tokens(text))
    pos = 0

    def take(what):
        nonlocal pos
        if pos >= len(toks):
            last = toks[-1][0] if toks else 1
            raise CAFileError(f"unexpected end of file, expected {what}", last)
        pos += 1
        return toks[pos - 1]

    def keyword(word):
        no, tok = take(repr(word))
        if tok != word:
            raise CAFileError(f"expected {word!r}, got {tok!r}", no)
        return no

    keyword("ca")
    no, ver = take("format version")
    if ver != "v1":
        raise CAFileError(f"unsupported format version {ver!r}", no)
    keyword("states")
    no, tok = take("state count")
    n = _int(tok, no, "the state count")
    if n < 1:
        raise CAFileError("state count must be positive", no)
    keyword("radius")
    no, tok = take("radius")
    r = _int(tok, no, "the radius")
    if r < 0:
        raise CAFileError("radius must be non-negative", no)
    keyword("rule")
    no, kind = take("rule kind")
    if kind == "table":
        size = n ** (2 * r + 1)
        rest = toks[pos:]
        if len(rest) != size:
            where = rest[-1][0] if rest else no
            raise CAFileError(f"rule table has {len(rest)} entries, expected {size}", where)
        table = []
        for tno, tok in rest:
            v = _int(tok, tno, "a table entry")
            if not 0 <= v < n:
                raise CAFileError(f"table entry {v} outside 0..{n - 1}", tno)
            table.append(v)
        return Automaton(n, r, table=table, label=label)
    if kind == "additive":
        pno, tok = take("modulus")
        p = _int(tok, pno, "the modulus")
        if p != n or r != 1:
            raise CAFileError(f"additive rule needs states {p} and radius 1", pno)
        _no_trailing(toks, pos)
        a = additive(p)
        a.label = label or a.label
        return a
    if kind == "shiftprod":
        kno, tok = take("factor count")
        k = _int(tok, kno, "the factor count")
        factors = []
        for _ in range(k):
            fno, ftok = take("factor state count")
            zno, ztok = take("factor vector")
            factors.append((_int(ftok, fno, "a factor state count"), _int(ztok, zno, "a factor vector")))
        _no_trailing(toks, pos)
        try:
            sp = ShiftProduct(tuple(factors))
        except CAError as exc:
            raise CAFileError(str(exc), kno) from None
        a = shift_product(sp)
        if a.states != n:
            raise CAFileError(f"shift product has {a.states} states, header says {n}", kno)
        if a.radius != r:
            raise CAFileError(f"shift product has radius {a.radius}, header says {r}", kno)
        a.label = label or a.label
        return a
    raise CAFileError(f"unknown rule kind {kind!r}", no)


def _no_trailing(toks, pos):
    if pos < len(toks):
        no, tok = toks[pos]
        raise CAFileError(f"unexpected token {tok!r} after the rule", no)


def parse_ca(path) -> Automaton:
    path = Path(path)
    return parse_ca_text(path.read_text(), label=path.stem)


def format_ca(a: Automaton) -> str:
    """Text form of ``a``.

    Shift products are written symbolically with their characteristic data
    in a trailing comment block; everything else as a table, one line per
    context of the ``2r`` leftmost cells.
    """
    head = ["ca v1", f"states {a.states}", f"radius {a.radius}"]
    sp = a.meta.get("shiftprod")
    if sp is not None:
        body = [f"rule shiftprod {len(sp.factors)}"]
        body += [f"{n} {z}" for n, z in sp.factors]
        body.append(f"# level {shift_product_level(sp)}")
        if len(sp.factors) >= 3:
            body.append("# characteristic " + " ".join(str(q) for q in characteristic_sequence(sp)))
        return "\n".join(head + body) + "\n"
    table = np.asarray(a.table, dtype=np.int64)
    vals = [str(v) for v in table.tolist()]
    body = ["rule table"]
    for i in range(0, len(vals), a.states):
        body.append(" ".join(vals[i:i + a.states]))
    return "\n".join(head + body) + "\n"


def write_ca(a: Automaton, path) -> None:
    Path(path).write_text(format_ca(a))
