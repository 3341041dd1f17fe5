"""Exact event algebra and credence measures over a protocol.

Two kinds of atoms exist.  Branch atoms are the rows of the branch table,
keyed by their profile tuple.  Centered atoms are ``(profile, awakening index)``
pairs, one per possible "here and now" of the observer.  A branch-level event
is lifted to a centered space by membership of the atom's branch.

Everything is computed with :class:`fractions.Fraction`; no floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Sequence

from .protocol import Branch, ExperimentProtocol, ProtocolError

BRANCH = "branch"
CENTERED = "centered"

HALFER = "halfer"
THIRDER = "thirder"
WEIGHTINGS = (HALFER, THIRDER)

NAIVE_FLAG = "ignores objective weights"


class MeasureError(ValueError):
    pass


class ScopeError(MeasureError):
    pass


class ConditioningOnNullError(MeasureError, ZeroDivisionError):
    pass


class PartitionError(MeasureError):
    pass


@dataclass(frozen=True)
class Event:
    """An explicit set of atoms of one scope.

    Intersecting a branch event with a centered event gives a centered event.
    Unions and complements need both operands (or a space) of the same scope.
    """

    scope: str
    members: frozenset
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.scope not in (BRANCH, CENTERED):
            raise ScopeError(f"unknown scope {self.scope!r}")
        object.__setattr__(self, "members", frozenset(self.members))

    def __and__(self, other: Event) -> Event:
        label = f"{self.label}∩{other.label}" if self.label and other.label else ""
        if self.scope == other.scope:
            return Event(self.scope, self.members & other.members, label)
        branch, centered = (self, other) if self.scope == BRANCH else (other, self)
        return Event(CENTERED, {c for c in centered.members if c[0] in branch.members}, label)

    def __or__(self, other: Event) -> Event:
        if self.scope != other.scope:
            raise ScopeError("union of branch and centered events needs an explicit lift")
        label = f"{self.label}∪{other.label}" if self.label and other.label else ""
        return Event(self.scope, self.members | other.members, label)

    def named(self, label: str) -> Event:
        return Event(self.scope, self.members, label)


# -- event constructors -------------------------------------------------------


def branch_event(protocol: ExperimentProtocol, select, label: str = "") -> Event:
    """Branch event from branch names, profiles, or a predicate on :class:`Branch`."""
    if callable(select):
        members = {b.profile for b in protocol.branches if select(b)}
    else:
        members = {protocol.branch(k).profile for k in select}
    return Event(BRANCH, members, label)


def outcome_event(protocol: ExperimentProtocol, label: str, randomizer: str | None = None) -> Event:
    """Branches whose profile fixes ``randomizer`` to ``label``.

    With no randomizer given, the unique randomizer owning ``label`` is used.
    Wildcard entries never match.
    """
    if randomizer is None:
        owners = [i for i, r in enumerate(protocol.randomizers) if label in r.labels]
        if len(owners) != 1:
            raise MeasureError(f"outcome {label!r} is ambiguous or unknown in {protocol.name}")
        idx = owners[0]
    else:
        idx = [r.id for r in protocol.randomizers].index(randomizer)
    return branch_event(protocol, lambda b: b.profile[idx] == label, label)


def wake_event(protocol: ExperimentProtocol) -> Event:
    return branch_event(protocol, lambda b: bool(b.awakenings), "Wake")


def sees_event(protocol: ExperimentProtocol, signal: str, label: str | None = None) -> Event:
    """Branch event: the signal is shown at some awakening of the branch."""
    return branch_event(
        protocol, lambda b: any(signal in a.signals for a in b.awakenings), label or signal.capitalize()
    )


def centered_event(protocol: ExperimentProtocol, predicate: Callable, label: str = "") -> Event:
    """Centered event from a predicate ``(branch, index, awakening) -> bool``."""
    members = {
        (b.profile, i)
        for b in protocol.branches
        for i, a in enumerate(b.awakenings)
        if predicate(b, i, a)
    }
    return Event(CENTERED, members, label)


def day_event(protocol: ExperimentProtocol, day: str) -> Event:
    return centered_event(protocol, lambda b, i, a: a.day == day, day)


def signal_event(protocol: ExperimentProtocol, signal: str) -> Event:
    """Centered event: the signal is shown at this awakening."""
    return centered_event(protocol, lambda b, i, a: signal in a.signals, f"{signal} now")


def lift(protocol: ExperimentProtocol, event: Event) -> Event:
    if event.scope == CENTERED:
        return event
    return centered_event(protocol, lambda b, i, a: b.profile in event.members, event.label)


def named_event(protocol: ExperimentProtocol, name: str) -> Event:
    """Resolve report notation: outcome labels, day labels, ``Wake``, ``A∩B``."""
    if "∩" in name or "&" in name:
        parts = name.replace("&", "∩").split("∩")
        result = named_event(protocol, parts[0].strip())
        for p in parts[1:]:
            result = result & named_event(protocol, p.strip())
        return result.named(name)
    if name == "Wake":
        return wake_event(protocol)
    if name in protocol.days():
        return day_event(protocol, name)
    try:
        return outcome_event(protocol, name)
    except MeasureError:
        pass
    names = {b.name for b in protocol.branches}
    if name in names:
        return branch_event(protocol, [name], name)
    signals = {s for b in protocol.branches for a in b.awakenings for s in a.signals}
    if name.lower() in signals:
        return sees_event(protocol, name.lower(), name)
    raise MeasureError(f"cannot resolve event {name!r} in {protocol.name}")


# -- measures -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Measure:
    """Exact weights over the atoms of one scope.

    ``rule`` names how the weights were made (``objective``, ``halfer``,
    ``thirder``, ``naive``).  ``erroneous`` is set on deliberately wrong
    models and must be surfaced by any report using them.
    """

    protocol: ExperimentProtocol
    scope: str
    rule: str
    weights: dict
    erroneous: str | None = None
    conditioned_out: tuple = ()

    @property
    def atoms(self):
        return tuple(self.weights)

    def total(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def universe(self) -> Event:
        return Event(self.scope, self.weights.keys(), "Ω")

    def coerce(self, event: Event) -> Event:
        if event.scope == self.scope:
            return event
        if event.scope == BRANCH and self.scope == CENTERED:
            return Event(CENTERED, {k for k in self.weights if k[0] in event.members}, event.label)
        raise ScopeError(f"{event.scope} event {event.label!r} on a {self.scope} measure")

    def prob(self, event: Event) -> Fraction:
        event = self.coerce(event)
        return sum((self.weights.get(k, Fraction(0)) for k in event.members), Fraction(0))

    def complement(self, event: Event) -> Event:
        event = self.coerce(event)
        return Event(self.scope, set(self.weights) - event.members, f"¬{event.label}")


class CenteredSpace(Measure):
    @property
    def weighting(self) -> str:
        return self.rule


def objective_measure(protocol: ExperimentProtocol) -> Measure:
    weights = {a.profile: a.objective_weight for a in protocol.atoms()}
    return Measure(protocol, BRANCH, "objective", weights)


def objective(protocol: ExperimentProtocol, event: Event) -> Fraction:
    if event.scope != BRANCH:
        raise ScopeError("objective probability is defined on branch-level events")
    return objective_measure(protocol).prob(event)


def probability(space: Measure, event: Event) -> Fraction:
    return space.prob(event)


def condition(space: Measure, target: Event, given: Event) -> Fraction:
    denominator = space.prob(given)
    if denominator == 0:
        raise ConditioningOnNullError(f"P({given.label or 'given'}) = 0")
    joint = space.coerce(target) & space.coerce(given)
    return space.prob(joint) / denominator


def centered(protocol: ExperimentProtocol, weighting: str) -> CenteredSpace:
    """Centered space under the halfer or thirder weighting rule.

    Branches without awakenings are conditioned out and listed in
    ``conditioned_out``.
    """
    if weighting not in WEIGHTINGS:
        raise MeasureError(f"unknown weighting {weighting!r}")
    atoms = protocol.atoms()
    awake = [a for a in atoms if a.branch.awakenings]
    if not awake:
        raise ProtocolError("no-awakenings", f"{protocol.name} has no awakenings")
    dropped = tuple(a.profile for a in atoms if not a.branch.awakenings)

    weights = {}
    if weighting == HALFER:
        p_wake = sum(a.objective_weight for a in awake)
        for a in awake:
            share = a.objective_weight / p_wake / len(a.branch.awakenings)
            for i in range(len(a.branch.awakenings)):
                weights[(a.profile, i)] = share
    else:
        norm = sum(a.objective_weight * len(a.branch.awakenings) for a in awake)
        for a in awake:
            for i in range(len(a.branch.awakenings)):
                weights[(a.profile, i)] = a.objective_weight / norm
    return CenteredSpace(protocol, CENTERED, weighting, weights, conditioned_out=dropped)


def branch_credence(protocol: ExperimentProtocol, weighting: str) -> dict[tuple, Fraction]:
    """Marginal of a centered space on branches: the observer's P(branch)."""
    space = centered(protocol, weighting)
    out = {b.profile: Fraction(0) for b in protocol.branches if b.awakenings}
    for (profile, _), w in space.weights.items():
        out[profile] += w
    return out


def naive_indifference(protocol: ExperimentProtocol) -> Measure:
    """Uniform weight on every branch atom, whatever its objective weight.

    This is the flawed equiprobable-cases reasoning; the result is flagged.
    """
    n = len(protocol.branches)
    weights = {b.profile: Fraction(1, n) for b in protocol.branches}
    return Measure(protocol, BRANCH, "naive", weights, erroneous=NAIVE_FLAG)


@dataclass(frozen=True)
class Decomposition:
    cells: tuple[Event, ...]
    terms: tuple[tuple[Fraction | None, Fraction], ...]
    total: Fraction

    def __iter__(self):
        return iter(self.terms)


def decompose(space: Measure, target: Event, partition: Sequence[Event]) -> Decomposition:
    """Law of total probability: ``P(target) = Σ P(target|cell)·P(cell)``.

    A zero-measure cell gets ``None`` as its conditional and contributes 0.
    """
    cells = tuple(space.coerce(c) for c in partition)
    seen = set()
    for c in cells:
        if seen & c.members:
            raise PartitionError("partition cells are not disjoint")
        seen |= c.members
    if seen != set(space.weights):
        raise PartitionError("partition does not cover the space")

    terms = []
    total = Fraction(0)
    for c in cells:
        pc = space.prob(c)
        if pc == 0:
            terms.append((None, pc))
            continue
        cond = condition(space, target, c)
        terms.append((cond, pc))
        total += cond * pc
    return Decomposition(cells, tuple(terms), total)


@dataclass(frozen=True)
class OverlapReport:
    events: tuple[Event, ...]
    measures: tuple[Fraction, ...]
    intersections: dict
    total: Fraction

    @property
    def disjoint(self) -> bool:
        return all(v == 0 for v in self.intersections.values())

    @property
    def verdict(self) -> str:
        return "disjoint" if self.disjoint else "overlapping"


def overlap_report(space: Measure, events: Sequence[Event]) -> OverlapReport:
    """Per-event measures, pairwise intersections and their naive sum.

    A sum above 1 exposes events that are being treated as exclusive when
    they are not.
    """
    events = tuple(space.coerce(e) for e in events)
    measures = tuple(space.prob(e) for e in events)
    intersections = {(i, j): space.prob(events[i] & events[j]) for i, j in combinations(range(len(events)), 2)}
    return OverlapReport(events, measures, intersections, sum(measures, Fraction(0)))


def wake_likelihood_ratio(protocol: ExperimentProtocol, weighting: str, event: Event) -> Fraction:
    """The ratio P(Wake|E)/P(Wake) implied by Bayes when a centered credence
    for ``E`` is read as an update of its objective probability.
    """
    return centered(protocol, weighting).prob(event) / objective(protocol, event)


_KNOWLEDGE = {
    "before-first-awakening": "the coin is tossed before any awakening; at every awakening it has already been tossed",
    "after-monday": "the coin is tossed on Monday evening; told it is Monday, the observer knows it has not yet been tossed",
}


def knowledge_report(protocol: ExperimentProtocol) -> list[str]:
    """Describe knowledge-state annotations.  They carry no probabilistic force."""
    notes = protocol.annotation
    lines = []
    if "toss_time" in notes:
        t = notes["toss_time"]
        lines.append(f"toss_time={t}: {_KNOWLEDGE.get(t, 'unrecognised toss time')}")
    if notes.get("coin_decides") == "tuesday-only":
        lines.append("coin_decides=tuesday-only: the toss only decides whether a Tuesday awakening happens")
    if notes.get("toss_time") == "after-monday":
        lines.append(
            "equal Monday credences for H and T follow here from extra information "
            "(an untossed coin), not from the shared branch table"
        )
    return lines
