from fractions import Fraction as F

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import books, money_values
from sleepingbeauty import betting as bt
from sleepingbeauty.betting import EPSILON, ZERO, ChoiceProfile, MoneyExpr, Policy, money
from sleepingbeauty.protocol import builtin

e = EPSILON


def accept_all(book):
    return ChoiceProfile.uniform(book.protocol, book.upfront is not None, True)


def reject_all(book):
    return ChoiceProfile.uniform(book.protocol, False, False)


# -- MoneyExpr -----------------------------------------------------------------------


@pytest.mark.parametrize(
    "text, value",
    [("-15+2e", MoneyExpr(-15, 2)), ("5/3e", MoneyExpr(0, F(5, 3))), ("-5+3·e", MoneyExpr(-5, 3)), ("e", e), ("0", ZERO), ("10", MoneyExpr(10))],
)
def test_money_parse(text, value):
    assert MoneyExpr.parse(text) == value
    assert MoneyExpr.parse(str(value)) == value


def test_money_str():
    assert str(MoneyExpr(-5, 3)) == "-5+3·e"
    assert str(e) == "e"
    assert str(MoneyExpr(0, F(5, 3))) == "5/3·e"
    assert str(MoneyExpr(-5, F(1, 2))) == "-5+1/2·e"


def test_money_order_is_lexicographic():
    assert money("-5+3e") < ZERO
    assert ZERO < e
    assert money("1-100e") > money("0+100e")
    assert MoneyExpr(2) * F(1, 2) + e == money("1+e")


def test_money_root():
    assert money("-5+3e").root() == F(5, 3)
    assert money("5+3e").root() is None
    assert money("7").root() is None


@settings(max_examples=500, deadline=None)
@given(money_values, money_values, money_values)
def test_money_order_transitive(a, b, c):
    if a < b and b < c:
        assert a < c
    assert (a < b) + (b < a) + (a == b) == 1


@settings(max_examples=500, deadline=None)
@given(money_values, money_values)
def test_money_order_matches_small_epsilon(a, b):
    d = a - b
    tiny = F(1, 10**6)
    assume(d.root() is None or d.root() > tiny)
    v = d.at(tiny)
    assert (d > ZERO) == (v > 0)
    assert (d < ZERO) == (v < 0)


# -- settle ----------------------------------------------------------------------------


def test_hitchcock_accept_all():
    book = bt.hitchcock()
    report = bt.settle(book, accept_all(book))
    assert report["H"] == report["T"] == money("-5+3e")
    assert report.sure_loss
    assert report.flip_epsilon == F(5, 3)


def test_hitchcock_reject_all():
    book = bt.hitchcock()
    report = bt.settle(book, reject_all(book))
    assert report["H"] == report["T"] == ZERO
    assert not report.sure_loss


def test_briggs_accept_all():
    book = bt.briggs()
    report = bt.settle(book, accept_all(book))
    assert report["H"] == report["T"] == money("-5+3e")
    assert report.flip_epsilon == F(5, 3)


def test_flip_epsilon_boundary():
    report = bt.settle(bt.hitchcock(), accept_all(bt.hitchcock()))
    for v in report.payoffs.values():
        assert v.at(F(5, 3) - F(1, 100)) < 0
        assert v.at(F(5, 3) + F(1, 100)) > 0


def test_choice_mismatch():
    book = bt.hitchcock()
    with pytest.raises(bt.ChoiceMismatchError):
        bt.settle(book, ChoiceProfile(True, {(("H",), 0): True}))


def test_table_iv():
    rows = bt.choice_table(bt.hitchcock_game2())
    assert rows == [
        ("H", "Y", money("10+e")),
        ("H", "N", ZERO),
        ("T", "YY", money("-20+2e")),
        ("T", "YN", money("-10+e")),
        ("T", "NY", money("-10+e")),
        ("T", "NN", ZERO),
    ]


def test_empty_book():
    book = bt.BettingBook(builtin("sbp"), ())
    rows = bt.enumerate_settlements(book)
    assert len(rows) == 1
    assert set(rows[0][1].payoffs.values()) == {ZERO}


@pytest.mark.parametrize("name", sorted(bt.BOOKS))
def test_enumerate_counts(name):
    book = bt.builtin_book(name)
    rows = bt.enumerate_settlements(book)
    assert len(rows) == 2 ** bt.decision_points(book)
    assert len({c for c, _ in rows}) == len(rows)
    for choices, report in rows:
        assert bt.settle(book, choices) == report


def test_state_space_too_large():
    with pytest.raises(bt.StateSpaceTooLarge):
        bt.enumerate_settlements(bt.hitchcock_game2(builtin("n_waking(20)")))


@settings(max_examples=300, deadline=None)
@given(books(), st.data())
def test_settle_additive_over_offers(book, data):
    keys = bt.awakening_keys(book.protocol)
    choices = ChoiceProfile(data.draw(st.booleans()), {k: data.draw(st.booleans()) for k in keys})
    joint = bt.settle(book, choices).payoffs
    parts = [bt.settle(book.with_offers([o]), choices).payoffs for o in book.offers]
    for profile, value in joint.items():
        assert sum((p[profile] for p in parts), ZERO) == value


@settings(max_examples=200, deadline=None)
@given(books())
def test_reject_all_never_loses(book):
    decision = bt.decide(book, Policy(bt.REJECT_ALL))
    assert not decision.report.sure_loss
    assert set(decision.report.payoffs.values()) == {ZERO}


# -- valuation -----------------------------------------------------------------------


@pytest.mark.parametrize("p", [F(0), F(1, 2), F(1)])
def test_cdt_halfer_formulas(p):
    book = bt.hitchcock()
    tail = p * money("-5+1/2e")
    assert bt.cdt_value(book, "game2", "halfer", p, "accept") == e + tail
    assert bt.cdt_value(book, "game2", "halfer", p, "reject") == tail


@settings(max_examples=100, deadline=None)
@given(st.fractions(min_value=0, max_value=1), st.sampled_from(["halfer", "thirder"]))
def test_cdt_gap_independent_of_p_star(p, cred):
    book = bt.hitchcock_game2()
    gap = bt.cdt_value(book, "game2", cred, p, "accept") - bt.cdt_value(book, "game2", cred, p, "reject")
    assert gap == bt.cdt_value(book, "game2", cred, 0, "accept")
    if cred == "halfer":
        assert gap == e


def test_edt_values():
    assert bt.edt_value(bt.hitchcock(), "game2", "halfer", "accept") == money("-5+3/2e")
    assert bt.edt_value(bt.briggs(), "game2*", "thirder", "accept") == money("5/3e")
    assert bt.edt_value(bt.briggs(), "game2*", "thirder", "reject") == ZERO
    assert bt.edt_table(bt.hitchcock_game2()) == {"H": money("10+e"), "T": money("-20+2e")}


def test_zero_payoffs_value_zero():
    book = bt.parse_book("offer z when=each H=0 T=0\n")
    for action in ("accept", "reject"):
        assert bt.edt_value(book, "z", "thirder", action) == ZERO
        assert bt.cdt_value(book, "z", "halfer", F(1, 2), action) == ZERO


def test_offer_kind_mismatch():
    with pytest.raises(bt.OfferKindError):
        bt.cdt_value(bt.hitchcock(), "game1", "halfer", 1, "accept")
    with pytest.raises(bt.OfferKindError):
        bt.edt_value(bt.briggs(), "game1*", "thirder", "accept")


def test_upfront_games_fair_at_one_half():
    assert bt.upfront_value(bt.hitchcock()) == money("3/2e")
    assert bt.upfront_value(bt.briggs()) == money("3/2e")


def test_bad_p_star():
    with pytest.raises(bt.BettingError):
        Policy.parse("cdt-halfer", F(3, 2))


# -- decisions -------------------------------------------------------------------------


@pytest.mark.parametrize("p", [F(0), F(1, 2), F(1)])
def test_cdt_halfer_accepts_hitchcock(p):
    d = bt.decide(bt.hitchcock(), Policy.parse("cdt-halfer", p))
    assert d.accepts_each and d.choices.upfront
    assert d.report.sure_loss


def test_edt_halfer_refuses_game2():
    d = bt.decide(bt.hitchcock(), Policy.parse("edt-halfer"))
    assert not d.accepts_each
    assert not d.report.sure_loss


def test_edt_thirder_exploited_by_briggs():
    d = bt.decide(bt.briggs(), Policy.parse("edt-thirder"))
    assert d.accepts_each and d.choices.upfront
    assert d.report.sure_loss


@pytest.mark.parametrize("name", sorted(bt.BOOKS))
def test_reject_all_on_builtin_books(name):
    assert not bt.decide(bt.builtin_book(name), Policy.parse("reject-all")).report.sure_loss


# -- book format ---------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(bt.BOOKS))
def test_book_round_trip(name):
    book = bt.builtin_book(name)
    again = bt.parse_book(bt.render_book(book))
    assert again.offers == book.offers


def test_book_parse_errors():
    with pytest.raises(bt.BettingError, match="line 2"):
        bt.parse_book("offer a when=once H=1 T=1\noffer b when=sometimes H=1 T=1\n")
    with pytest.raises(bt.BettingError):
        bt.parse_book("offer a when=once H=1 T=1\noffer b when=once H=1 T=1\n")
    with pytest.raises(bt.BettingError):
        bt.parse_book("offer a when=each H=1\n")


# -- N awakenings --------------------------------------------------------------------


def test_n_waking_losses():
    report = bt.n_waking_cdt_edt(100, Policy.parse("cdt-halfer"))
    tails = {r.n: r.accept_all["T"] for r in report.rows}
    assert tails[2] == money("-20+2e")
    # hand oracle: three accepted Game 2 bets on Tails
    assert tails[3] == 3 * money("-10+e")
    assert tails[100] == money("-1000+100e")
    assert all(r.accept_all["H"] == money("10+e") for r in report.rows)
    assert report.monotone


def test_n_waking_needs_two():
    with pytest.raises(bt.BettingError):
        bt.n_waking_cdt_edt(1, Policy.parse("cdt-halfer"))
