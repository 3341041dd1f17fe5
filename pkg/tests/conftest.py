from fractions import Fraction

import sys

import pytest
from hypothesis import strategies as st

from sleepingbeauty.betting import EACH, ONCE, BettingBook, MoneyExpr, Offer
from sleepingbeauty.protocol import Awakening, Branch, ExperimentProtocol, Randomizer, builtin, validate

DAYS = ("Mo", "Tu", "We", "Th")
SIGNALS = ("red", "blue")


@pytest.fixture
def sbp():
    return builtin("sbp")


@pytest.fixture
def technicolor():
    return builtin("technicolor")


@st.composite
def weights(draw, k):
    raw = draw(st.lists(st.integers(1, 9), min_size=k, max_size=k))
    total = sum(raw)
    return [Fraction(r, total) for r in raw]


@st.composite
def small_protocols(draw, max_awakenings=4, one_each=False):
    """At most 4 outcome profiles, at most ``max_awakenings`` awakenings per branch."""
    shape = draw(st.sampled_from([(1,), (2,), (3,), (4,), (2, 2), (1, 2), (2, 1)]))
    randomizers = []
    for i, k in enumerate(shape):
        labels = [f"{chr(65 + i)}{j}" for j in range(k)]
        randomizers.append(Randomizer(f"r{i}", tuple(zip(labels, draw(weights(k))))))
    branches = []
    profiles = list(ExperimentProtocol("x", tuple(randomizers), ()).outcome_profiles())
    for profile in profiles:
        if one_each:
            n = 1
        else:
            n = draw(st.integers(0, max_awakenings))
        aw = tuple(
            Awakening(DAYS[d], frozenset(draw(st.sets(st.sampled_from(SIGNALS), max_size=2))))
            for d in range(n)
        )
        branches.append(Branch(tuple(profile), aw))
    if not any(b.awakenings for b in branches):
        b = branches[0]
        branches[0] = Branch(b.profile, (Awakening("Mo"),))
    return validate(ExperimentProtocol("random", tuple(randomizers), tuple(branches)))


money_values = st.builds(
    MoneyExpr,
    st.fractions(min_value=-30, max_value=30, max_denominator=6),
    st.fractions(min_value=-5, max_value=5, max_denominator=6),
)


@st.composite
def books(draw):
    protocol = draw(small_protocols(max_awakenings=3))
    labels = protocol.primary.labels
    offers = []
    if draw(st.booleans()):
        offers.append(Offer("up", ONCE, {l: draw(money_values) for l in labels}))
    for k in range(draw(st.integers(0, 2))):
        offers.append(Offer(f"each{k}", EACH, {l: draw(money_values) for l in labels}))
    return BettingBook(protocol, tuple(offers), "random")


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is not None and acceptance.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance.LINES:
            terminalreporter.write_line(line)
