from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import small_protocols
from sleepingbeauty.protocol import (
    BUILTIN_NAMES,
    ExperimentProtocol,
    ProtocolError,
    Randomizer,
    ScenarioSyntaxError,
    builtin,
    make_protocol,
    parse,
    render,
    validate,
)


def test_sbp_is_valid(sbp):
    assert validate(sbp) is sbp
    assert [b.name for b in sbp.branches] == ["H", "T"]
    assert sbp.branch("H").days == ("Mo",)
    assert sbp.branch("T").days == ("Mo", "Tu")


def test_weight_sum_error():
    with pytest.raises(ProtocolError) as exc:
        make_protocol("bad", [("coin", {"H": Fraction(1, 2), "T": Fraction(1, 3)})], {"H": ["Mo"], "T": ["Mo"]})
    assert exc.value.code == "weight-sum"


def test_no_awakenings_error():
    with pytest.raises(ProtocolError) as exc:
        make_protocol("bad", [("coin", {"H": Fraction(1, 2), "T": Fraction(1, 2)})], {"H": [], "T": []})
    assert exc.value.code == "no-awakenings"


@pytest.mark.parametrize(
    "randomizers, table, code",
    [
        ([("c", {"H": 1})], {"H": ["Mo", "Mo"]}, "duplicate-label"),
        ([("c", {"H": Fraction(1, 2), "T": Fraction(1, 2)})], {"H": ["Mo"]}, "missing-branch"),
        ([("c", {"H": 0, "T": 1})], {"H": ["Mo"], "T": ["Mo"]}, "non-positive-weight"),
        ([("c", {"H": Fraction(1, 2), "T": Fraction(1, 2)}), ("d", {"x": 1})], {"H *": ["Mo"], "H x": ["Mo"], "T x": []}, "overlapping-branch"),
        ([("c", {"H": 1})], {"Q": ["Mo"]}, "unknown-outcome"),
    ],
)
def test_invariant_violations(randomizers, table, code):
    with pytest.raises(ProtocolError) as exc:
        make_protocol("bad", randomizers, table)
    assert exc.value.code == code


def test_duplicate_outcome_label():
    r = Randomizer("c", (("H", Fraction(1, 2)), ("H", Fraction(1, 2))))
    with pytest.raises(ProtocolError, match="duplicate-label"):
        validate(ExperimentProtocol("bad", (r,), ()))


def test_builtin_technicolor():
    p = builtin("technicolor")
    rows = {b.name: ([(a.day, sorted(a.signals)) for a in b.awakenings], p.branch_weight(b)) for b in p.branches}
    q = Fraction(1, 4)
    assert rows == {
        "TO": ([("Mo", ["red"]), ("Tu", ["blue"])], q),
        "TE": ([("Mo", ["blue"]), ("Tu", ["red"])], q),
        "HO": ([("Mo", ["red"])], q),
        "HE": ([("Mo", ["blue"])], q),
    }


def test_n_waking_2_is_sbp(sbp):
    assert builtin("n_waking(2)").branches == sbp.branches
    assert builtin("n_waking(2)").randomizers == sbp.randomizers


def test_dalembert_atoms():
    atoms = {a.branch.name: a.objective_weight for a in builtin("dalembert").atoms()}
    assert atoms == {"H": Fraction(1, 2), "TH": Fraction(1, 4), "TT": Fraction(1, 4)}


def test_unknown_builtin():
    with pytest.raises(ProtocolError, match="unknown-scenario"):
        builtin("monty_hall")


def test_elga_variants_share_branch_table(sbp):
    for name in ("method2", "method2prime"):
        p = builtin(name)
        assert p.branches == sbp.branches
        assert [a.objective_weight for a in p.atoms()] == [a.objective_weight for a in sbp.atoms()]
        assert p.annotation != sbp.annotation
    assert builtin("method2").annotation["toss_time"] == "after-monday"


@pytest.mark.parametrize("name", [n for n in BUILTIN_NAMES if n != "n_waking(N)"] + ["n_waking(5)"])
def test_builtins_round_trip_and_normalize(name):
    p = builtin(name)
    assert parse(render(p)) == p
    assert sum(a.objective_weight for a in p.atoms()) == 1


def test_render_is_canonical():
    text = """
    # out-of-order, non-reduced fractions
    randomizer coin {H:2/4, T:3/6}
    branch T -> [Mo, Tu]
    branch H -> [Mo]
    """
    assert render(parse(text)) == "name scenario\nrandomizer coin {H:1/2, T:1/2}\nbranch H -> [Mo]\nbranch T -> [Mo, Tu]\n"


def test_missing_tails_branch_is_totality_error():
    text = "randomizer coin {H:1/2, T:1/2}\nbranch H -> [Mo]\n"
    with pytest.raises(ProtocolError) as exc:
        parse(text)
    assert exc.value.code == "missing-branch"


def test_biased_two_waking_protocol():
    p = parse(
        """
        name biased
        randomizer coin {H:1/3, T:2/3}
        branch H -> [Mo]
        branch T -> [Mo(red), Tu(red, blue)]
        """
    )
    # built by hand
    assert {a.branch.name: a.objective_weight for a in p.atoms()} == {"H": Fraction(1, 3), "T": Fraction(2, 3)}
    assert p.branch("T").awakenings[1].signals == {"red", "blue"}


def test_quantum_kind_round_trip():
    p = builtin("second_q_toss")
    assert "randomizer coin2 quantum {H2:1/2, T2:1/2}" in render(p)
    assert "branch H * -> [Mo]" in render(p)


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("randomizer coin {H:1/2, T:1/2}\nbrunch H -> [Mo]", 2, 1),
        ("randomizer coin {H:1/2, T:1/2}\nbranch H [Mo]", 2, 14),
        ("randomizer coin {H:1/2, T:x}", 1, 27),
        ("randomizer coin {H:1/2, T1/2}", 1, 25),
        ("  randomizer coin H:1/2", 1, 24),
        ("randomizer coin {H:1/2, T:1/2}\nbranch H -> [Mo, T$u]", 2, 18),
    ],
)
def test_syntax_errors_carry_position(text, line, column):
    with pytest.raises(ScenarioSyntaxError) as exc:
        parse(text)
    assert (exc.value.line, exc.value.column) == (line, column)


def test_protocols_are_immutable(sbp):
    with pytest.raises(AttributeError):
        sbp.name = "other"


@settings(max_examples=100, deadline=None)
@given(small_protocols())
def test_random_round_trip(p):
    assert parse(render(p)) == p
    assert render(parse(render(p))) == render(p)
    assert sum(a.objective_weight for a in p.atoms()) == 1
