import pytest

from bulkca.cafile import CAFileError, format_ca, parse_ca, parse_ca_text, write_ca
from bulkca.zoo import ZOO_SMALL, ShiftProduct, additive, shift_product


@pytest.mark.parametrize("name", sorted(ZOO_SMALL))
def test_round_trip_on_zoo(name, tmp_path):
    a = ZOO_SMALL[name]()
    path = tmp_path / f"{name}.ca"
    write_ca(a, path)
    b = parse_ca(path)
    assert (b.states, b.radius) == (a.states, a.radius)
    assert list(b.table) == list(a.table)
    # byte-stable: writing the parsed automaton reproduces the file
    assert format_ca(b) == path.read_text()


def test_additive_rule_matches_zoo():
    a = parse_ca_text("ca v1\nstates 2\nradius 1\nrule additive 2\n")
    assert list(a.table) == list(additive(2).table)


def test_shiftprod_is_symbolic():
    a = shift_product(ShiftProduct.binary((0, 1, 2, 3)))
    text = format_ca(a)
    assert "rule shiftprod 4" in text
    assert "# characteristic 2 3" in text
    b = parse_ca_text(text)
    assert b.meta["shiftprod"] == a.meta["shiftprod"]
    assert format_ca(b) == text


def test_comments_and_line_breaks():
    text = "# identity\nca v1\nstates 2 # two\nradius 0\nrule table\n0\n1\n"
    assert list(parse_ca_text(text).table) == [0, 1]


@pytest.mark.parametrize(
    "text,line,fragment",
    [
        ("ca v1\nstates 2\nradius 1\nrule table\n0 1 1 0\n1 0\n", 5 + 1, "expected 8"),
        ("ca v2\nstates 2\nradius 0\nrule table 0 1\n", 1, "version"),
        ("ca v1\nstates x\n", 2, "state count"),
        ("ca v1\nstates 2\nradius 0\nrule table\n0 2\n", 5, "outside"),
        ("ca v1\nstates 2\nradius 0\nrule magic\n", 4, "unknown rule kind"),
        ("ca v1\nstates 3\nradius 1\nrule additive 2\n", 4, "additive"),
        ("ca v1\nstates 2\nradius 1\n", 3, "'rule'"),
        ("da v1\n", 1, "'ca'"),
        ("ca v1\nstates 4\nradius 2\nrule shiftprod 2\n2 1\n2 0\n", 4, "radius"),
    ],
)
def test_diagnostics_carry_line_numbers(text, line, fragment):
    with pytest.raises(CAFileError) as info:
        parse_ca_text(text)
    assert info.value.line == line
    assert fragment in str(info.value)
    assert str(info.value).startswith(f"line {line}:")
