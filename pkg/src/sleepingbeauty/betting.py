"""Betting books with a symbolic tiebreaker ε and their settlement.

Money is affine in ε: ``constant + coeff·ε`` for an arbitrarily small ε > 0,
compared lexicographically.  Offers are keyed by the outcome of the
protocol's primary randomizer (the coin).  An ``each`` offer is made at every
awakening; an ``once`` offer is made up front, before the experiment.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Mapping, Sequence

from .measure import HALFER, THIRDER, WEIGHTINGS, branch_credence, objective_measure
from .protocol import Branch, ExperimentProtocol, builtin, n_waking

ONCE = "once_upfront"
EACH = "every_awakening"

MAX_DECISION_POINTS = 20


class BettingError(ValueError):
    pass


class ChoiceMismatchError(BettingError):
    pass


class OfferKindError(BettingError):
    pass


class StateSpaceTooLarge(BettingError):
    pass


def _frac_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


_MONEY_TERM = re.compile(r"([+-]?)\s*(\d+(?:/\d+)?)?\s*(·?e)?")


@total_ordering
@dataclass(frozen=True)
class MoneyExpr:
    constant: Fraction = Fraction(0)
    epsilon_coeff: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "constant", Fraction(self.constant))
        object.__setattr__(self, "epsilon_coeff", Fraction(self.epsilon_coeff))

    @classmethod
    def parse(cls, text: str) -> MoneyExpr:
        """Parse ``-15+2e``, ``15+e``, ``5/3e``, ``-5+3·e`` or a plain rational."""
        s = text.replace(" ", "").replace("ε", "e")
        if not s:
            raise BettingError("empty money expression")
        constant = Fraction(0)
        coeff = Fraction(0)
        pos = 0
        while pos < len(s):
            m = _MONEY_TERM.match(s, pos)
            if not m or m.end() == pos or not (m.group(2) or m.group(3)):
                raise BettingError(f"bad money expression {text!r}")
            if pos > 0 and not m.group(1):
                raise BettingError(f"bad money expression {text!r}")
            sign = -1 if m.group(1) == "-" else 1
            value = Fraction(m.group(2)) if m.group(2) else Fraction(1)
            if m.group(3):
                coeff += sign * value
            else:
                constant += sign * value
            pos = m.end()
        return cls(constant, coeff)

    def __str__(self):
        c, e = self.constant, self.epsilon_coeff
        if e == 0:
            return _frac_str(c)
        eps = "e" if abs(e) == 1 else f"{_frac_str(abs(e))}·e"
        if c == 0:
            return eps if e > 0 else f"-{eps}"
        return f"{_frac_str(c)}{'+' if e > 0 else '-'}{eps}"

    def __add__(self, other):
        other = _money(other)
        return MoneyExpr(self.constant + other.constant, self.epsilon_coeff + other.epsilon_coeff)

    __radd__ = __add__

    def __neg__(self):
        return MoneyExpr(-self.constant, -self.epsilon_coeff)

    def __sub__(self, other):
        return self + (-_money(other))

    def __rsub__(self, other):
        return _money(other) - self

    def __mul__(self, k):
        if isinstance(k, MoneyExpr):
            raise TypeError("money can only be scaled by a rational")
        k = Fraction(k)
        return MoneyExpr(self.constant * k, self.epsilon_coeff * k)

    __rmul__ = __mul__

    def __truediv__(self, k):
        return self * (1 / Fraction(k))

    def __eq__(self, other):
        try:
            other = _money(other)
        except TypeError:
            return NotImplemented
        return (self.constant, self.epsilon_coeff) == (other.constant, other.epsilon_coeff)

    def __hash__(self):
        return hash((self.constant, self.epsilon_coeff))

    def __lt__(self, other):
        other = _money(other)
        return (self.constant, self.epsilon_coeff) < (other.constant, other.epsilon_coeff)

    def sign(self) -> int:
        """Sign for all sufficiently small ε > 0."""
        return (self > ZERO) - (self < ZERO)

    def at(self, epsilon) -> Fraction:
        return self.constant + self.epsilon_coeff * Fraction(epsilon)

    def root(self) -> Fraction | None:
        """The ε > 0 where this expression crosses zero, if any."""
        if self.epsilon_coeff == 0:
            return None
        r = -self.constant / self.epsilon_coeff
        return r if r > 0 else None

    def sign_above(self, epsilon: Fraction) -> int:
        """Sign just to the right of ``epsilon``."""
        v = self.at(epsilon)
        if v != 0:
            return (v > 0) - (v < 0)
        return (self.epsilon_coeff > 0) - (self.epsilon_coeff < 0)


ZERO = MoneyExpr()
EPSILON = MoneyExpr(0, 1)


def _money(x) -> MoneyExpr:
    if isinstance(x, MoneyExpr):
        return x
    if isinstance(x, (int, Fraction)):
        return MoneyExpr(x)
    raise TypeError(f"cannot treat {x!r} as money")


def money(text) -> MoneyExpr:
    return text if isinstance(text, MoneyExpr) else MoneyExpr.parse(str(text))


@dataclass(frozen=True)
class Offer:
    id: str
    when: str
    payoff: Mapping[str, MoneyExpr]

    def __post_init__(self):
        if self.when not in (ONCE, EACH):
            raise BettingError(f"offer {self.id}: when must be {ONCE} or {EACH}")
        object.__setattr__(self, "payoff", {k: money(v) for k, v in dict(self.payoff).items()})

    def __hash__(self):
        return hash((self.id, self.when, tuple(sorted(self.payoff.items()))))


@dataclass(frozen=True)
class BettingBook:
    protocol: ExperimentProtocol
    offers: tuple[Offer, ...]
    name: str = "book"

    def __post_init__(self):
        object.__setattr__(self, "offers", tuple(self.offers))
        if sum(o.when == ONCE for o in self.offers) > 1:
            raise BettingError("a book may hold at most one once_upfront offer")
        outcomes = set(self.protocol.primary.labels)
        for o in self.offers:
            if set(o.payoff) != outcomes:
                raise BettingError(
                    f"offer {o.id} must price exactly the outcomes {sorted(outcomes)} of {self.protocol.primary.id}"
                )

    @property
    def upfront(self) -> Offer | None:
        return next((o for o in self.offers if o.when == ONCE), None)

    @property
    def each(self) -> tuple[Offer, ...]:
        return tuple(o for o in self.offers if o.when == EACH)

    def offer(self, offer_id: str) -> Offer:
        for o in self.offers:
            if o.id == offer_id:
                return o
        raise KeyError(offer_id)

    def with_offers(self, offers: Sequence[Offer], name: str | None = None) -> BettingBook:
        return BettingBook(self.protocol, tuple(offers), name or self.name)

    def each_payoff(self, branch: Branch) -> MoneyExpr:
        """Payoff of accepting the per-awakening offers once in ``branch``."""
        outcome = self.protocol.primary_outcome(branch)
        return sum((o.payoff[outcome] for o in self.each), ZERO)


@dataclass(frozen=True)
class ChoiceProfile:
    """Accept/reject decisions: the up-front offer and every awakening."""

    upfront: bool
    per_awakening: Mapping[tuple, bool] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "per_awakening", dict(self.per_awakening))

    def __hash__(self):
        return hash((self.upfront, tuple(sorted(self.per_awakening.items()))))

    @classmethod
    def uniform(cls, protocol: ExperimentProtocol, upfront: bool, each: bool) -> ChoiceProfile:
        return cls(upfront, {k: each for k in awakening_keys(protocol)})

    def branch_choices(self, branch: Branch) -> tuple[bool, ...]:
        return tuple(self.per_awakening[(branch.profile, i)] for i in range(len(branch.awakenings)))


def awakening_keys(protocol: ExperimentProtocol) -> list[tuple]:
    return [(b.profile, i) for b in protocol.branches for i in range(len(b.awakenings))]


@dataclass(frozen=True)
class SettlementReport:
    payoffs: Mapping[tuple, MoneyExpr]  # branch profile -> net payoff
    names: Mapping[tuple, str] = field(default_factory=dict, compare=False)

    @property
    def sure_loss(self) -> bool:
        return bool(self.payoffs) and all(v < ZERO for v in self.payoffs.values())

    @property
    def flip_epsilon(self) -> Fraction | None:
        """Smallest ε > 0 at which the sure-loss verdict changes, if any."""
        roots = sorted({r for v in self.payoffs.values() if (r := v.root()) is not None})
        base = self.sure_loss
        for r in roots:
            after = all(v.sign_above(r) < 0 for v in self.payoffs.values())
            if after != base:
                return r
        return None

    def by_name(self) -> dict[str, MoneyExpr]:
        return {self.names.get(k, str(k)): v for k, v in self.payoffs.items()}

    def __getitem__(self, name: str) -> MoneyExpr:
        return self.by_name()[name]


def _check_profile(book: BettingBook, choices: ChoiceProfile):
    expected = set(awakening_keys(book.protocol))
    got = set(choices.per_awakening)
    if got != expected:
        missing = sorted(map(str, expected - got))
        extra = sorted(map(str, got - expected))
        raise ChoiceMismatchError(f"choice profile mismatch; missing {missing}, unexpected {extra}")


def settle(book: BettingBook, choices: ChoiceProfile) -> SettlementReport:
    """Net payoff per branch of the accepted offers."""
    _check_profile(book, choices)
    payoffs = {}
    up = book.upfront
    for b in book.protocol.branches:
        outcome = book.protocol.primary_outcome(b)
        total = ZERO
        if up is not None and choices.upfront:
            total += up.payoff[outcome]
        accepted = sum(choices.branch_choices(b))
        for o in book.each:
            total += accepted * o.payoff[outcome]
        payoffs[b.profile] = total
    return SettlementReport(payoffs, {b.profile: b.name for b in book.protocol.branches})


def decision_points(book: BettingBook) -> int:
    n = 1 if book.upfront is not None else 0
    if book.each:
        n += book.protocol.total_awakenings
    return n


def enumerate_settlements(book: BettingBook) -> list[tuple[ChoiceProfile, SettlementReport]]:
    """Settle every choice profile.  Accepting is enumerated before rejecting."""
    if decision_points(book) > MAX_DECISION_POINTS:
        raise StateSpaceTooLarge(f"{decision_points(book)} decision points exceeds {MAX_DECISION_POINTS}")
    keys = awakening_keys(book.protocol)
    ups = (True, False) if book.upfront is not None else (False,)
    eaches = itertools.product((True, False), repeat=len(keys)) if book.each else [(False,) * len(keys)]
    rows = []
    for each in eaches:
        for up in ups:
            choices = ChoiceProfile(up, dict(zip(keys, each)))
            rows.append((choices, settle(book, choices)))
    return rows


def choice_table(book: BettingBook) -> list[tuple[str, str, MoneyExpr]]:
    """Per-branch payoff for each local choice string (``Y``/``N`` per awakening).

    Projects :func:`enumerate_settlements` onto single branches; for a book
    holding only per-awakening offers this is the all-choices table.
    """
    seen = {}
    for choices, report in enumerate_settlements(book):
        for b in book.protocol.branches:
            local = ("Y" if choices.upfront else "") if book.upfront is not None else ""
            local += "".join("Y" if c else "N" for c in choices.branch_choices(b))
            seen.setdefault((b.profile, local), (b.name, local, report.payoffs[b.profile]))
    order = {b.profile: k for k, b in enumerate(book.protocol.branches)}
    rows = sorted(seen.items(), key=lambda kv: (order[kv[0][0]], [c != "Y" for c in kv[0][1]]))
    return [row for _, row in rows]


def edt_table(book: BettingBook) -> dict[str, MoneyExpr]:
    """Per-awakening offers re-priced for an agent whose awakenings all act alike."""
    return {b.name: len(b.awakenings) * book.each_payoff(b) for b in book.protocol.branches}


# -- valuation -------------------------------------------------------------------

ACCEPT = "accept"
REJECT = "reject"


def _as_credence(protocol: ExperimentProtocol, credence) -> dict[tuple, Fraction]:
    if isinstance(credence, str):
        return branch_credence(protocol, credence)
    return {protocol.branch(k).profile: Fraction(v) for k, v in dict(credence).items()}


def _action(action) -> int:
    if action in (ACCEPT, True):
        return 1
    if action in (REJECT, False):
        return 0
    raise BettingError(f"unknown action {action!r}")


def _each_offer(book: BettingBook, offer) -> Offer:
    o = book.offer(offer) if isinstance(offer, str) else offer
    if o.when != EACH:
        raise OfferKindError(f"offer {o.id} is not made at every awakening")
    return o


def cdt_value(book: BettingBook, offer, credence, p_accept_star, action) -> MoneyExpr:
    """Expected value of one awakening's action when every other awakening in
    the branch independently accepts with probability ``p_accept_star``.

    ``credence`` is a weighting name or an explicit branch -> probability map.
    """
    o = _each_offer(book, offer)
    p_star = Fraction(p_accept_star)
    if not 0 <= p_star <= 1:
        raise BettingError("p_accept_star must lie in [0, 1]")
    a = _action(action)
    weights = _as_credence(book.protocol, credence)
    value = ZERO
    for b in book.protocol.branches:
        k = len(b.awakenings)
        if k == 0 or weights.get(b.profile, 0) == 0:
            continue
        accepts = a + (k - 1) * p_star
        value += weights[b.profile] * accepts * o.payoff[book.protocol.primary_outcome(b)]
    return value


def edt_value(book: BettingBook, offer, credence, action) -> MoneyExpr:
    """Expected value when all awakenings of a branch take the same action."""
    o = _each_offer(book, offer)
    a = _action(action)
    weights = _as_credence(book.protocol, credence)
    value = ZERO
    for b in book.protocol.branches:
        w = weights.get(b.profile, 0)
        if w:
            value += w * a * len(b.awakenings) * o.payoff[book.protocol.primary_outcome(b)]
    return value


def upfront_value(book: BettingBook) -> MoneyExpr:
    """Value of the up-front offer under the objective measure."""
    up = book.upfront
    if up is None:
        return ZERO
    obj = objective_measure(book.protocol)
    return sum(
        (obj.weights[b.profile] * up.payoff[book.protocol.primary_outcome(b)] for b in book.protocol.branches),
        ZERO,
    )


ACCEPT_ALL = "accept_all"
REJECT_ALL = "reject_all"
DECISION = "decision_theoretic"
CDT = "cdt"
EDT = "edt"


@dataclass(frozen=True)
class Policy:
    kind: str
    theory: str | None = None
    credence: str | None = None
    p_accept_star: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "p_accept_star", Fraction(self.p_accept_star))
        if self.kind not in (ACCEPT_ALL, REJECT_ALL, DECISION):
            raise BettingError(f"unknown policy kind {self.kind!r}")
        if self.kind == DECISION:
            if self.theory not in (CDT, EDT):
                raise BettingError("decision-theoretic policy needs theory cdt or edt")
            if self.credence not in WEIGHTINGS:
                raise BettingError("decision-theoretic policy needs a halfer or thirder credence")
        if not 0 <= self.p_accept_star <= 1:
            raise BettingError("p_accept_star must lie in [0, 1]")

    @classmethod
    def parse(cls, name: str, p_accept_star=1) -> Policy:
        """``accept-all``, ``reject-all`` or ``<cdt|edt>-<halfer|thirder>``."""
        name = name.replace("_", "-")
        if name == "accept-all":
            return cls(ACCEPT_ALL)
        if name == "reject-all":
            return cls(REJECT_ALL)
        theory, _, cred = name.partition("-")
        return cls(DECISION, theory, cred, p_accept_star)

    @property
    def label(self) -> str:
        if self.kind != DECISION:
            return self.kind.replace("_", "-")
        s = f"{self.theory}-{self.credence}"
        return s + (f" (p*={_frac_str(self.p_accept_star)})" if self.theory == CDT else "")


@dataclass(frozen=True)
class Decision:
    choices: ChoiceProfile
    report: SettlementReport
    accept_upfront_value: MoneyExpr | None = None
    accept_value: MoneyExpr | None = None
    reject_value: MoneyExpr | None = None

    @property
    def accepts_each(self) -> bool:
        return any(self.choices.per_awakening.values())


def _bundle_book(book: BettingBook) -> tuple[BettingBook, Offer]:
    """Fold all per-awakening offers into one so the awakening decision is a single choice."""
    keys = book.protocol.primary.labels
    bundle = Offer(
        "+".join(o.id for o in book.each) or "none",
        EACH,
        {k: sum((o.payoff[k] for o in book.each), ZERO) for k in keys},
    )
    return book.with_offers([bundle]), bundle


def decide(book: BettingBook, policy: Policy) -> Decision:
    """Choose actions under ``policy`` and settle the resulting profile.

    Awakenings are indistinguishable to the agent, so the same action is
    taken at each.  Ties reject.
    """
    if policy.kind in (ACCEPT_ALL, REJECT_ALL):
        accept = policy.kind == ACCEPT_ALL
        choices = ChoiceProfile.uniform(book.protocol, accept and book.upfront is not None, accept and bool(book.each))
        return Decision(choices, settle(book, choices))

    up_value = upfront_value(book) if book.upfront is not None else None
    take_up = up_value is not None and up_value > ZERO
    acc = rej = None
    take_each = False
    if book.each:
        bundled, offer = _bundle_book(book)
        if policy.theory == CDT:
            acc = cdt_value(bundled, offer, policy.credence, policy.p_accept_star, ACCEPT)
            rej = cdt_value(bundled, offer, policy.credence, policy.p_accept_star, REJECT)
        else:
            acc = edt_value(bundled, offer, policy.credence, ACCEPT)
            rej = edt_value(bundled, offer, policy.credence, REJECT)
        take_each = acc > rej
    choices = ChoiceProfile.uniform(book.protocol, take_up, take_each)
    return Decision(choices, settle(book, choices), up_value, acc, rej)


# -- built-in books ----------------------------------------------------------------


def _offer(oid, when, heads, tails) -> Offer:
    return Offer(oid, when, {"H": money(heads), "T": money(tails)})


def hitchcock(protocol: ExperimentProtocol | None = None) -> BettingBook:
    """Game 1 on Sunday, Game 2 at every awakening; both fair at credence 1/2."""
    protocol = protocol or builtin("sbp")
    return BettingBook(
        protocol,
        (_offer("game1", ONCE, "-15+2e", "15+e"), _offer("game2", EACH, "10+e", "-10+e")),
        "hitchcock",
    )


def hitchcock_game2(protocol: ExperimentProtocol | None = None) -> BettingBook:
    return BettingBook(protocol or builtin("sbp"), (_offer("game2", EACH, "10+e", "-10+e"),), "hitchcock_game2")


def briggs(protocol: ExperimentProtocol | None = None) -> BettingBook:
    """Game 1* on Sunday, Game 2* at every awakening; exploits EDT thirders."""
    protocol = protocol or builtin("sbp")
    return BettingBook(
        protocol,
        (_offer("game1*", ONCE, "15+2e", "-15+e"), _offer("game2*", EACH, "-20+e", "5+e")),
        "briggs",
    )


BOOKS = {"hitchcock": hitchcock, "hitchcock_game2": hitchcock_game2, "briggs": briggs}


def builtin_book(name: str, protocol: ExperimentProtocol | None = None) -> BettingBook:
    try:
        return BOOKS[name](protocol)
    except KeyError:
        raise BettingError(f"no built-in book {name!r}") from None


# -- book text format ----------------------------------------------------------------

_WHEN = {"once": ONCE, "each": EACH}
_OFFER_RE = re.compile(r"^offer\s+(\S+)\s+when=(once|each)((?:\s+\S+=\S+)+)\s*$")


def parse_book(text: str, protocol: ExperimentProtocol | None = None, name: str = "custom") -> BettingBook:
    """Parse ``offer <id> when=<once|each> H=<a>+<b>e T=<c>+<d>e`` lines."""
    protocol = protocol or builtin("sbp")
    offers = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _OFFER_RE.match(line)
        if not m:
            raise BettingError(f"line {lineno}: expected 'offer <id> when=<once|each> <outcome>=<money> ...'")
        payoff = {}
        for item in m.group(3).split():
            k, _, v = item.partition("=")
            try:
                payoff[k] = MoneyExpr.parse(v)
            except BettingError as exc:
                raise BettingError(f"line {lineno}: {exc}") from None
        offers.append(Offer(m.group(1), _WHEN[m.group(2)], payoff))
    return BettingBook(protocol, tuple(offers), name)


def render_book(book: BettingBook) -> str:
    inv = {v: k for k, v in _WHEN.items()}
    lines = []
    for o in book.offers:
        prices = " ".join(f"{k}={str(o.payoff[k]).replace('·', '')}" for k in book.protocol.primary.labels)
        lines.append(f"offer {o.id} when={inv[o.when]} {prices}")
    return "\n".join(lines) + "\n"


def load_book(path, protocol: ExperimentProtocol | None = None) -> BettingBook:
    with open(path, encoding="utf-8") as fh:
        return parse_book(fh.read(), protocol, name=f"custom:{path}")


# -- N-waking generalisation --------------------------------------------------------


@dataclass(frozen=True)
class NWakingRow:
    n: int
    accept_all: SettlementReport
    cdt_gap: MoneyExpr  # V(accept) - V(reject) under CDT
    edt_accept: MoneyExpr
    decision: Decision


@dataclass(frozen=True)
class NWakingReport:
    policy: Policy
    rows: tuple[NWakingRow, ...]

    @property
    def monotone(self) -> bool:
        """Tails loss under accept-all strictly grows with the number of awakenings."""
        tails = [r.accept_all["T"] for r in self.rows]
        return all(b < a for a, b in zip(tails, tails[1:]))


def n_waking_cdt_edt(n: int, policy: Policy, template=hitchcock_game2, start: int = 2) -> NWakingReport:
    """Run the per-awakening book on Tails-wakes-``k``-times protocols for k = start..n.

    CDT with more than two awakenings treats each other awakening as an
    independent accept with probability p*.
    """
    if n < 2:
        raise BettingError("N must be at least 2")
    cred = policy.credence or HALFER
    rows = []
    for k in range(start, n + 1):
        book = template(n_waking(k))
        choices = ChoiceProfile.uniform(book.protocol, book.upfront is not None, True)
        bundled, offer = _bundle_book(book)
        gap = cdt_value(bundled, offer, cred, policy.p_accept_star, ACCEPT) - cdt_value(
            bundled, offer, cred, policy.p_accept_star, REJECT
        )
        rows.append(
            NWakingRow(k, settle(book, choices), gap, edt_value(bundled, offer, cred, ACCEPT), decide(book, policy))
        )
    return NWakingReport(policy, tuple(rows))

