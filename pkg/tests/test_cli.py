import pytest

from bulkca.cli import main, parse_config
from bulkca.core import CAError

from conftest import GOLDEN


@pytest.fixture
def make(tmp_path):
    def build(name, *params):
        path = tmp_path / f"{name}{'_'.join(params)}.ca"
        assert main(["make", name, *params, "-o", str(path)]) == 0
        return str(path)

    return build


def test_parse_config_forms():
    assert parse_config("0110", 2).word == (0, 1, 1, 0)
    assert parse_config("0 1 2", 3).word == (0, 1, 2)
    assert parse_config("3 : 0 1 2", 3).word == (0, 1, 2)
    with pytest.raises(CAError):
        parse_config("0a", 2)


def test_make_and_info(make, capsys):
    path = make("shiftprod", "2", "0", "2", "1", "2", "2")
    capsys.readouterr()
    assert main(["--porcelain", "info", path]) == 0
    out = capsys.readouterr().out.splitlines()
    assert "states=8" in out
    assert "level=3" in out
    assert "characteristic=2" in out


def test_make_unknown_constructor(capsys):
    assert main(["make", "nonsense"]) == 1
    assert "unknown constructor" in capsys.readouterr().err


def test_usage_error_exit_code(capsys):
    assert main(["search"]) == 1
    assert main([]) == 1


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.ca"
    bad.write_text("ca v1\nstates 2\nradius 1\nrule table 0 1\n")
    assert main(["info", str(bad)]) == 1
    assert "line 4" in capsys.readouterr().err
    assert main(["info", str(tmp_path / "missing.ca")]) == 1


def test_run_ascii(make, capsys):
    path = make("additive", "2")
    capsys.readouterr()
    assert main(["run", path, "--config", "0001000", "--steps", "2"]) == 0
    assert capsys.readouterr().out == "...#...\n..###..\n.#.#.#.\n"


def test_run_pgm_matches_golden(make, tmp_path, capsys):
    path = make("additive", "2")
    out = tmp_path / "cone.pgm"
    config = "000000010000000"
    assert main(["run", path, "--config", config, "--steps", "8", "--pgm", str(out)]) == 0
    assert out.read_bytes() == (GOLDEN / "z2_cone.pgm").read_bytes()


def test_props_report(make, capsys):
    path = make("max", "2")
    capsys.readouterr()
    assert main(["props", path]) == 0
    out = capsys.readouterr().out
    assert "surjective fails 010" in out
    assert "balanced fails" in out
    assert main(["--porcelain", "props", path]) == 0
    out = capsys.readouterr().out.splitlines()
    assert "analyzer=surjective verdict=fails witness=010" in out


def test_check_exit_codes(make, capsys):
    z2, id2, big, small = make("additive", "2"), make("identity", "2"), make("parity-big"), make("parity-small")
    assert main(["check", "--rel", "quot", "--map", "map 3: 0 1 1", small, big]) == 0
    assert "quot holds" in capsys.readouterr().out
    # an exhaustive refutation is reported as fails with exit code 2
    assert main(["check", "--rel", "quot", "--map", "map 3: 0 0 1", small, big]) == 2
    assert "quot fails" in capsys.readouterr().out
    assert main(["check", "--rel", "sub", z2, id2]) == 2


def test_search_exit_codes(make, capsys):
    a2 = make("shiftprod", "2", "0", "2", "1", "2", "2")
    a23 = make("shiftprod", "2", "0", "2", "1", "2", "2", "2", "3")
    capsys.readouterr()
    assert main(["--porcelain", "search", "--rel", "inj", a2, a23]) == 0
    rec = capsys.readouterr().out
    assert rec.startswith("verdict=holds relation=inj")
    z2, z3 = make("additive", "2"), make("additive", "3")
    capsys.readouterr()
    args = ["search", "--rel", "surj", "--max-m", "1", "--max-T", "1", "--max-shift", "0", "--max-group", "1"]
    assert main(args + [z3, z2]) == 2
    assert capsys.readouterr().out.startswith("unknown")


def test_transform_round_trip(make, tmp_path, capsys):
    path = make("shift", "2", "1")
    out = tmp_path / "packed.ca"
    assert main(["transform", path, "2:1:0", "-o", str(out)]) == 0
    capsys.readouterr()
    assert main(["--porcelain", "info", str(out)]) == 0
    lines = capsys.readouterr().out.splitlines()
    # a packed cell holds cells 2i, 2i+1 and the first reads the previous block
    assert "states=4" in lines and "neighborhood=-1,0 exact=True" in lines


def test_porcelain_quotes_spaces(make, capsys):
    path = make("shiftprod", "2", "0", "2", "1", "2", "3", "2", "5")
    capsys.readouterr()
    main(["--porcelain", "info", path])
    out = capsys.readouterr().out
    assert 'characteristic="3 5"' in out
