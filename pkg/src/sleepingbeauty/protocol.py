"""Awakening protocols: randomizers, branch tables and the scenario text format.

A protocol is a finite table mapping randomizer outcome profiles to awakening
schedules.  A profile entry may be the wildcard ``*``, meaning the branch does
not depend on that randomizer (the randomizer contributes a factor of 1 to the
branch weight).  This is how stopping games such as d'Alembert's two tosses and
conditional quantum splits are expressed without inventing extra atoms.

Scenario text format (one declaration per line, ``#`` starts a comment)::

    name sbp
    annotate toss_time=before-first-awakening
    randomizer coin {H:1/2, T:1/2}
    randomizer q quantum {H:1/2, T:1/2}
    branch H -> [Mo]
    branch T -> [Mo, Tu]
    branch T O -> [Mo(red), Tu(blue)]
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

WILDCARD = "*"
CLASSICAL = "classical"
QUANTUM = "quantum"

_LABEL = r"[A-Za-z0-9_.'+\-]+"
_LABEL_RE = re.compile(rf"^{_LABEL}$")


class ProtocolError(ValueError):
    """A protocol violates one of its structural invariants.

    ``code`` is a short machine-readable tag such as ``weight-sum`` or
    ``missing-branch``.
    """

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class ScenarioSyntaxError(ProtocolError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__("syntax", f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Randomizer:
    id: str
    outcomes: tuple[tuple[str, Fraction], ...]
    kind: str = CLASSICAL

    def __post_init__(self):
        object.__setattr__(
            self, "outcomes", tuple((str(l), Fraction(w)) for l, w in self.outcomes)
        )

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.outcomes)

    def weight(self, label: str) -> Fraction:
        for name, w in self.outcomes:
            if name == label:
                return w
        raise KeyError(f"{self.id} has no outcome {label!r}")

    def index(self, label: str) -> int:
        return self.labels.index(label)


@dataclass(frozen=True)
class Awakening:
    day: str
    signals: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "signals", frozenset(self.signals))


@dataclass(frozen=True)
class Branch:
    profile: tuple[str, ...]
    awakenings: tuple[Awakening, ...] = ()

    @property
    def name(self) -> str:
        """Human label: ``TO`` for single-character outcomes, else ``T∧H2``."""
        parts = [p for p in self.profile if p != WILDCARD]
        if all(len(p) == 1 for p in parts):
            return "".join(parts)
        return "∧".join(parts)

    @property
    def days(self) -> tuple[str, ...]:
        return tuple(a.day for a in self.awakenings)

    def matches(self, outcomes: Sequence[str]) -> bool:
        return all(p == WILDCARD or p == o for p, o in zip(self.profile, outcomes))


@dataclass(frozen=True)
class BranchAtom:
    branch: Branch
    objective_weight: Fraction

    @property
    def profile(self) -> tuple[str, ...]:
        return self.branch.profile


@dataclass(frozen=True)
class ExperimentProtocol:
    """Randomizers plus a total branch table.

    ``annotations`` carry knowledge-state notes (for example when a coin is
    tossed) that never influence the branch table or any measure.
    """

    name: str
    randomizers: tuple[Randomizer, ...]
    branches: tuple[Branch, ...]
    annotations: tuple[tuple[str, str], ...] = ()
    _by_profile: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "randomizers", tuple(self.randomizers))
        object.__setattr__(self, "annotations", tuple(sorted(dict(self.annotations).items())))
        object.__setattr__(self, "branches", tuple(sorted(self.branches, key=self._sort_key)))
        object.__setattr__(self, "_by_profile", {b.profile: b for b in self.branches})

    def _sort_key(self, branch: Branch):
        key = []
        for r, p in zip(self.randomizers, branch.profile):
            key.append(-1 if p == WILDCARD or p not in r.labels else r.index(p))
        return tuple(key), branch.profile

    @property
    def primary(self) -> Randomizer:
        return self.randomizers[0]

    @property
    def annotation(self) -> dict[str, str]:
        return dict(self.annotations)

    def branch(self, key) -> Branch:
        """Look up a branch by profile tuple or by its display name."""
        if isinstance(key, Branch):
            return key
        if isinstance(key, tuple):
            return self._by_profile[key]
        for b in self.branches:
            if b.name == key:
                return b
        raise KeyError(f"no branch {key!r} in {self.name}")

    def branch_weight(self, branch: Branch) -> Fraction:
        w = Fraction(1)
        for r, p in zip(self.randomizers, branch.profile):
            if p != WILDCARD:
                w *= r.weight(p)
        return w

    def atoms(self) -> list[BranchAtom]:
        return [BranchAtom(b, self.branch_weight(b)) for b in self.branches]

    def primary_outcome(self, branch: Branch) -> str:
        outcome = branch.profile[0]
        if outcome == WILDCARD:
            raise ProtocolError("primary-wildcard", f"branch {branch.name} does not fix {self.primary.id}")
        return outcome

    def days(self) -> tuple[str, ...]:
        """All day labels, ordered by first schedule position."""
        seen: dict[str, int] = {}
        for b in self.branches:
            for pos, a in enumerate(b.awakenings):
                seen.setdefault(a.day, pos)
        return tuple(sorted(seen, key=lambda d: (seen[d], d)))

    def outcome_profiles(self) -> Iterator[tuple[str, ...]]:
        return itertools.product(*(r.labels for r in self.randomizers))

    def resolve(self, outcomes: Sequence[str]) -> Branch:
        """The unique branch covering a full outcome profile."""
        for b in self.branches:
            if b.matches(outcomes):
                return b
        raise ProtocolError("missing-branch", f"no branch covers {' '.join(outcomes)}")

    @property
    def total_awakenings(self) -> int:
        return sum(len(b.awakenings) for b in self.branches)


def validate(protocol: ExperimentProtocol) -> ExperimentProtocol:
    """Return ``protocol`` unchanged if every invariant holds, else raise the first violation."""
    if not protocol.randomizers:
        raise ProtocolError("no-randomizers", "a protocol needs at least one randomizer")
    ids = [r.id for r in protocol.randomizers]
    if len(set(ids)) != len(ids):
        raise ProtocolError("duplicate-label", f"randomizer ids not unique: {ids}")
    for r in protocol.randomizers:
        if r.kind not in (CLASSICAL, QUANTUM):
            raise ProtocolError("bad-kind", f"{r.id}: unknown kind {r.kind!r}")
        if not r.outcomes:
            raise ProtocolError("empty-randomizer", f"{r.id} has no outcomes")
        if len(set(r.labels)) != len(r.labels):
            raise ProtocolError("duplicate-label", f"{r.id}: outcome labels not unique")
        if WILDCARD in r.labels:
            raise ProtocolError("duplicate-label", f"{r.id}: '*' is reserved")
        for label, w in r.outcomes:
            if w <= 0:
                raise ProtocolError("non-positive-weight", f"{r.id}:{label} has weight {w}")
        total = sum(w for _, w in r.outcomes)
        if total != 1:
            raise ProtocolError("weight-sum", f"{r.id} weights sum to {total}, not 1")

    arity = len(protocol.randomizers)
    seen_profiles = set()
    for b in protocol.branches:
        if len(b.profile) != arity:
            raise ProtocolError("profile-arity", f"branch {b.profile} needs {arity} entries")
        if b.profile in seen_profiles:
            raise ProtocolError("overlapping-branch", f"branch {b.name} declared twice")
        seen_profiles.add(b.profile)
        for r, p in zip(protocol.randomizers, b.profile):
            if p != WILDCARD and p not in r.labels:
                raise ProtocolError("unknown-outcome", f"{p!r} is not an outcome of {r.id}")
        days = b.days
        if len(set(days)) != len(days):
            raise ProtocolError("duplicate-label", f"branch {b.name} repeats a day label")

    for outcomes in protocol.outcome_profiles():
        covering = [b for b in protocol.branches if b.matches(outcomes)]
        if not covering:
            raise ProtocolError("missing-branch", f"no branch covers {' '.join(outcomes)}")
        if len(covering) > 1:
            names = ", ".join(b.name or WILDCARD for b in covering)
            raise ProtocolError("overlapping-branch", f"{' '.join(outcomes)} covered by {names}")

    if not any(b.awakenings for b in protocol.branches):
        raise ProtocolError("no-awakenings", "every branch schedule is empty")
    return protocol


def make_protocol(name, randomizers, table, annotations=None) -> ExperimentProtocol:
    """Convenience constructor.

    ``randomizers`` is a sequence of ``(id, {label: weight}[, kind])`` tuples
    and ``table`` maps profile strings (``"T O"``) to lists of awakenings,
    each either a day label or a ``(day, signals)`` pair.
    """
    rands = []
    for spec in randomizers:
        rid, outcomes, *rest = spec
        kind = rest[0] if rest else CLASSICAL
        rands.append(Randomizer(rid, tuple((l, Fraction(w)) for l, w in outcomes.items()), kind))
    branches = []
    for profile, schedule in table.items():
        awakenings = []
        for item in schedule:
            if isinstance(item, str):
                awakenings.append(Awakening(item))
            else:
                day, signals = item
                awakenings.append(Awakening(day, frozenset(signals)))
        branches.append(Branch(tuple(profile.split()), tuple(awakenings)))
    return validate(ExperimentProtocol(name, tuple(rands), tuple(branches), tuple((annotations or {}).items())))


# -- built-in scenarios -------------------------------------------------------

_HALF = Fraction(1, 2)
_COIN = ("coin", {"H": _HALF, "T": _HALF})


def _sbp(name="sbp", toss_time="before-first-awakening", **extra):
    return make_protocol(
        name, [_COIN], {"H": ["Mo"], "T": ["Mo", "Tu"]}, {"toss_time": toss_time, **extra}
    )


def _n_waking_days(n: int) -> list[str]:
    return ["Mo", "Tu"][:n] + [f"D{k}" for k in range(3, n + 1)]


def n_waking(n: int) -> ExperimentProtocol:
    """Heads: one Monday awakening.  Tails: ``n`` awakenings."""
    if n < 1:
        raise ProtocolError("bad-parameter", "n_waking needs N >= 1")
    return make_protocol(
        f"n_waking({n})",
        [_COIN],
        {"H": ["Mo"], "T": _n_waking_days(n)},
        {"toss_time": "before-first-awakening"},
    )


def _technicolor():
    return make_protocol(
        "technicolor",
        [_COIN, ("die", {"O": _HALF, "E": _HALF})],
        {
            "H O": [("Mo", {"red"})],
            "H E": [("Mo", {"blue"})],
            "T O": [("Mo", {"red"}), ("Tu", {"blue"})],
            "T E": [("Mo", {"blue"}), ("Tu", {"red"})],
        },
    )


def _dalembert():
    # The game stops after a first Heads, so the second toss is irrelevant there.
    return make_protocol(
        "dalembert",
        [("toss1", {"H": _HALF, "T": _HALF}), ("toss2", {"H": _HALF, "T": _HALF})],
        {"H *": ["Mo"], "T H": ["Mo"], "T T": ["Mo"]},
    )


def _groisman():
    return make_protocol(
        "groisman",
        [_COIN],
        {"H": [("Mo", {"green"})], "T": [("Mo", {"red"}), ("Tu", {"red"})]},
    )


def _quantum_sbp():
    return make_protocol(
        "quantum_sbp",
        [("coin", {"H": _HALF, "T": _HALF}, QUANTUM)],
        {"H": ["Mo"], "T": ["Mo", "Tu"]},
    )


def _second_q_toss():
    return make_protocol(
        "second_q_toss",
        [("coin", {"H": _HALF, "T": _HALF}, QUANTUM), ("coin2", {"H2": _HALF, "T2": _HALF}, QUANTUM)],
        {"H *": ["Mo"], "T H2": ["Mo"], "T T2": ["Tu"]},
    )


def _sbp_tail():
    return make_protocol("sbp_tail", [("coin", {"T": 1}, QUANTUM)], {"T": ["Mo", "Tu"]})


def _second_q_toss_tail():
    return make_protocol(
        "second_q_toss_tail",
        [("coin2", {"H2": _HALF, "T2": _HALF}, QUANTUM)],
        {"H2": ["Mo"], "T2": ["Tu"]},
    )


_BUILTINS = {
    "sbp": _sbp,
    "method2": lambda: _sbp("method2", toss_time="after-monday"),
    "method2prime": lambda: _sbp("method2prime", coin_decides="tuesday-only"),
    "technicolor": _technicolor,
    "dalembert": _dalembert,
    "groisman": _groisman,
    "quantum_sbp": _quantum_sbp,
    "second_q_toss": _second_q_toss,
    "sbp_tail": _sbp_tail,
    "second_q_toss_tail": _second_q_toss_tail,
}

BUILTIN_NAMES = tuple(_BUILTINS) + ("n_waking(N)",)

_N_WAKING_RE = re.compile(r"^n_waking\((\d+)\)$")


def builtin(name: str) -> ExperimentProtocol:
    m = _N_WAKING_RE.match(name)
    if m:
        return n_waking(int(m.group(1)))
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise ProtocolError("unknown-scenario", f"no built-in scenario {name!r}") from None
    return factory()


# -- text format ----------------------------------------------------------------


def format_fraction(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def render(protocol: ExperimentProtocol) -> str:
    """Canonical scenario text: sorted profiles, lowest-terms fractions."""
    lines = [f"name {protocol.name}"]
    for key, value in protocol.annotations:
        lines.append(f"annotate {key}={value}")
    for r in protocol.randomizers:
        kind = f" {r.kind}" if r.kind != CLASSICAL else ""
        outcomes = ", ".join(f"{l}:{format_fraction(w)}" for l, w in r.outcomes)
        lines.append(f"randomizer {r.id}{kind} {{{outcomes}}}")
    for b in protocol.branches:
        items = []
        for a in b.awakenings:
            sig = f"({','.join(sorted(a.signals))})" if a.signals else ""
            items.append(a.day + sig)
        lines.append(f"branch {' '.join(b.profile)} -> [{', '.join(items)}]")
    return "\n".join(lines) + "\n"


_FRACTION_RE = re.compile(r"^(\d+)(?:/(\d+))?$")
_AWAKENING_RE = re.compile(rf"^({_LABEL})(?:\(\s*([^()]*)\))?$")


def _split_items(text: str, offset: int):
    """Split a comma list, yielding (stripped item, 1-based column)."""
    pos = 0
    depth = 0
    start = 0
    items = []
    for pos, ch in enumerate(text + ","):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            raw = text[start:pos]
            stripped = raw.strip()
            col = offset + start + (len(raw) - len(raw.lstrip())) + 1
            items.append((stripped, col))
            start = pos + 1
    if len(items) == 1 and not items[0][0]:
        return []
    return items


def parse(text: str) -> ExperimentProtocol:
    """Parse scenario text into a validated protocol."""
    name = "scenario"
    annotations: dict[str, str] = {}
    randomizers: list[Randomizer] = []
    branches: list[Branch] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.lstrip()
        if not stripped:
            continue
        indent = len(line) - len(stripped)
        keyword = stripped.split(None, 1)[0]
        rest_col = indent + len(keyword) + 1

        if keyword == "name":
            m = re.match(rf"^name\s+(\S+)$", stripped)
            if not m:
                raise ScenarioSyntaxError("expected 'name <label>'", lineno, rest_col + 1)
            name = m.group(1)
        elif keyword == "annotate":
            m = re.match(r"^annotate\s+([A-Za-z_]\w*)\s*=\s*(\S+)$", stripped)
            if not m:
                raise ScenarioSyntaxError("expected 'annotate <key>=<value>'", lineno, rest_col + 1)
            annotations[m.group(1)] = m.group(2)
        elif keyword == "randomizer":
            randomizers.append(_parse_randomizer(stripped, lineno, indent))
        elif keyword == "branch":
            branches.append(_parse_branch(stripped, lineno, indent))
        else:
            raise ScenarioSyntaxError(f"unknown declaration {keyword!r}", lineno, indent + 1)

    return validate(ExperimentProtocol(name, tuple(randomizers), tuple(branches), tuple(annotations.items())))


def _parse_randomizer(line: str, lineno: int, indent: int) -> Randomizer:
    m = re.match(rf"^randomizer\s+({_LABEL})(?:\s+(classical|quantum))?\s*\{{(.*)\}}\s*$", line)
    if not m:
        col = indent + len("randomizer") + 2
        if "{" not in line:
            col = indent + len(line) + 1
            raise ScenarioSyntaxError("expected '{' with outcome list", lineno, col)
        if not line.rstrip().endswith("}"):
            raise ScenarioSyntaxError("expected closing '}'", lineno, indent + len(line) + 1)
        raise ScenarioSyntaxError("expected 'randomizer <id> [quantum] {<label>:<p/q>, ...}'", lineno, col)
    rid, kind = m.group(1), m.group(2) or CLASSICAL
    body_col = indent + m.start(3)
    outcomes = []
    for item, col in _split_items(m.group(3), body_col):
        label, sep, weight = item.partition(":")
        label, weight = label.strip(), weight.strip()
        if not sep or not _LABEL_RE.match(label):
            raise ScenarioSyntaxError(f"bad outcome {item!r}, expected <label>:<p/q>", lineno, col)
        fm = _FRACTION_RE.match(weight)
        if not fm or (fm.group(2) is not None and int(fm.group(2)) == 0):
            wcol = col + item.index(":") + 1
            raise ScenarioSyntaxError(f"bad weight {weight!r}, expected p/q", lineno, wcol)
        outcomes.append((label, Fraction(int(fm.group(1)), int(fm.group(2) or 1))))
    return Randomizer(rid, tuple(outcomes), kind)


def _parse_branch(line: str, lineno: int, indent: int) -> Branch:
    head, arrow, tail = line.partition("->")
    if not arrow:
        raise ScenarioSyntaxError("expected '->'", lineno, indent + len(line) + 1)
    profile = tuple(head.split()[1:])
    if not profile:
        raise ScenarioSyntaxError("branch needs an outcome profile", lineno, indent + len("branch") + 2)
    for tok in profile:
        if tok != WILDCARD and not _LABEL_RE.match(tok):
            raise ScenarioSyntaxError(f"bad outcome label {tok!r}", lineno, indent + head.index(tok) + 1)
    tail_start = indent + len(head) + 2
    body = tail.strip()
    lead = len(tail) - len(tail.lstrip())
    if not (body.startswith("[") and body.endswith("]")):
        raise ScenarioSyntaxError("expected '[...]' schedule", lineno, tail_start + lead + 1)
    awakenings = []
    for item, col in _split_items(body[1:-1], tail_start + lead + 1):
        am = _AWAKENING_RE.match(item)
        if not am:
            raise ScenarioSyntaxError(f"bad awakening {item!r}, expected <day>(<signal>,...)", lineno, col)
        signals = frozenset(s.strip() for s in (am.group(2) or "").split(",") if s.strip())
        for s in signals:
            if not _LABEL_RE.match(s):
                raise ScenarioSyntaxError(f"bad signal {s!r}", lineno, col)
        awakenings.append(Awakening(am.group(1), signals))
    return Branch(profile, tuple(awakenings))


def load(path) -> ExperimentProtocol:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
