import json
from pathlib import Path

import pytest

from sleepingbeauty.cli import main

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def value_of(out, quantity):
    for line in out.splitlines():
        if line.startswith(quantity + " "):
            return line.split()[-1]
    raise AssertionError(f"{quantity} not in output")


def test_credence_halfer(capsys):
    code, out, _ = run(capsys, "credence", "--scenario", "sbp", "--weighting", "halfer")
    assert code == 0
    assert value_of(out, "P(H)") == "1/2"
    assert value_of(out, "P(Mo)") == "3/4"
    assert value_of(out, "P(H|Mo)") == "2/3"


def test_dutchbook_cdt_halfer(capsys):
    code, out, _ = run(capsys, "dutchbook", "--book", "hitchcock", "--policy", "cdt-halfer", "--pstar", "1/1")
    assert code == 0
    assert value_of(out, "sure_loss") == "true"
    assert value_of(out, "net(H)") == value_of(out, "net(T)") == "-5+3·e"


def test_simulate_per_awakening(capsys):
    argv = ["simulate", "--scenario", "sbp", "--n", "100000", "--seed", "42", "--mode", "per-awakening", "--event", "H"]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert value_of(out, "exact(H)") == "1/3"
    assert abs(float(value_of(out, "estimate (decimal)")) - 1 / 3) < 0.005
    assert out.rstrip().endswith("pass")


def test_branch_double_has_banner(capsys):
    code, out, _ = run(capsys, "branch", "--scenario", "quantum_sbp", "--mode", "double")
    assert code == 0
    assert "[ERRONEOUS MODEL]" in out
    assert value_of(out, "P(H world)") == "1/3"


def test_records_format(capsys):
    code, out, _ = run(capsys, "credence", "--scenario", "technicolor", "--format", "records")
    assert code == 0
    records = [json.loads(line) for line in out.splitlines()]
    assert records and all("value" in r for r in records)


def test_scenario_file(capsys, tmp_path):
    path = tmp_path / "biased.txt"
    path.write_text("randomizer coin {H:1/3, T:2/3}\nbranch H -> [Mo]\nbranch T -> [Mo, Tu]\n")
    code, out, _ = run(capsys, "credence", "--scenario", str(path), "--weighting", "thirder")
    assert code == 0
    assert value_of(out, "P(H)") == "1/5"


def test_custom_book(capsys, tmp_path):
    path = tmp_path / "book.txt"
    path.write_text("offer g when=each H=10+e T=-10+e\n")
    code, out, _ = run(capsys, "dutchbook", "--book", f"custom:{path}", "--policy", "accept-all")
    assert code == 0
    assert value_of(out, "net(T)") == "-20+2·e"


def test_n_waking(capsys):
    code, out, _ = run(capsys, "dutchbook", "--policy", "cdt-halfer", "--N", "5")
    assert code == 0
    assert "-50+5·e" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        ["simulate", "--scenario", "sbp", "--mode", "per-awakening"],
        ["simulate", "--scenario", "sbp", "--seed", "1"],
        ["credence", "--weighting", "quarter"],
        ["dutchbook", "--pstar", "banana"],
    ],
)
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert "usage" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["credence", "--scenario", "monty_hall"],
        ["credence", "--scenario", "/nonexistent/scenario.txt"],
        ["branch", "--scenario", "sbp"],
        ["simulate", "--scenario", "sbp", "--seed", "1", "--mode", "per-experiment", "--event", "Purple"],
    ],
)
def test_engine_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("error:")


def test_malformed_scenario_reports_position(capsys, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("randomizer coin {H:1/2, T:1/2}\nbrunch H -> [Mo]\n")
    code, _, err = run(capsys, "credence", "--scenario", str(path))
    assert code == 2
    assert "line 2" in err


def test_tables_golden_and_repeatable(capsys):
    code, first, _ = run(capsys, "tables")
    assert code == 0
    _, second, _ = run(capsys, "tables")
    assert first == second
    assert first == (GOLDEN / "tables.txt").read_text(encoding="utf-8")
