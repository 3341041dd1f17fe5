"""Many-worlds trees built from quantum randomizers.

Only squared amplitude moduli (Born weights) are stored, as exact
rationals.  A quantum randomizer splits a world only where the branch table
actually depends on it, so a second coin tossed only after Tails splits only
the Tails world.  Classical randomizers never split worlds.

Two world measures are offered.  ``single`` reads leaf Born weights directly.
``double`` reproduces a flawed procedure: the per-day superpositions are read
as (world, day) cells weighted by their Born weight, the cells where the
observer sleeps are deleted and the rest renormalized a second time.  The
double measure is permanently flagged as erroneous.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .measure import HALFER, centered, condition, day_event, objective, outcome_event
from .protocol import QUANTUM, WILDCARD, Branch, ExperimentProtocol, builtin

SINGLE = "single_normalization"
DOUBLE = "double_normalization"
DOUBLE_FLAG = "renormalizes already-normalized world weights"

_MODE_ALIASES = {"single": SINGLE, "double": DOUBLE, SINGLE: SINGLE, DOUBLE: DOUBLE}


class BranchingError(ValueError):
    pass


@dataclass(frozen=True)
class WorldNode:
    label: str
    born_weight: Fraction
    children: tuple[WorldNode, ...] = ()
    # protocol branches compatible with this world
    branches: tuple[Branch, ...] = field(default=(), compare=False)

    def leaves(self):
        if not self.children:
            yield self
        for c in self.children:
            yield from c.leaves()

    def render(self, depth: int = 0) -> list[str]:
        w = self.born_weight
        shown = str(w.numerator) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"
        lines = [f"{'  ' * depth}{self.label} : {shown}"]
        for c in self.children:
            lines.extend(c.render(depth + 1))
        return lines


@dataclass(frozen=True)
class WorldTree:
    root: WorldNode
    protocol: ExperimentProtocol | None = None

    def leaves(self) -> list[WorldNode]:
        return list(self.root.leaves())

    def leaf(self, label: str) -> WorldNode:
        for node in self.leaves():
            if node.label == label:
                return node
        raise KeyError(label)

    def render(self) -> str:
        return "\n".join(self.root.render()) + "\n"

    def check(self) -> None:
        """Raise unless every node's children carry exactly its weight."""

        def walk(node):
            if node.children:
                total = sum((c.born_weight for c in node.children), Fraction(0))
                if total != node.born_weight:
                    raise BranchingError(f"children of {node.label} sum to {total}, not {node.born_weight}")
                for c in node.children:
                    walk(c)

        if self.root.born_weight != 1:
            raise BranchingError("root weight must be 1")
        walk(self.root)


def from_quantum_protocol(protocol: ExperimentProtocol) -> WorldTree:
    quantum = [i for i, r in enumerate(protocol.randomizers) if r.kind == QUANTUM]
    if not quantum:
        raise BranchingError(f"{protocol.name} has no quantum randomizer")

    def build(label, weight, fixed, branches, remaining):
        if not remaining:
            return WorldNode(label, weight, (), tuple(branches))
        idx, rest = remaining[0], remaining[1:]
        if all(b.profile[idx] == WILDCARD for b in branches):
            return build(label, weight, fixed, branches, rest)
        r = protocol.randomizers[idx]
        children = []
        for outcome, w in r.outcomes:
            sub = [b for b in branches if b.profile[idx] in (outcome, WILDCARD)]
            child_label = outcome if label == "root" else f"{label}∧{outcome}"
            children.append(build(child_label, weight * w, {**fixed, idx: outcome}, sub, rest))
        return WorldNode(label, weight, tuple(children), tuple(branches))

    root = build("root", Fraction(1), {}, list(protocol.branches), quantum)
    tree = WorldTree(root, protocol)
    tree.check()
    return tree


@dataclass(frozen=True)
class WorldMeasure:
    mode: str
    weights: dict  # leaf label -> Fraction
    erroneous: str | None = None

    def prob(self, leaves) -> Fraction:
        return sum((self.weights[l] for l in leaves), Fraction(0))


def _leaf_days(node: WorldNode) -> set[str]:
    return {a.day for b in node.branches for a in b.awakenings}


def world_measure(tree: WorldTree, mode: str = SINGLE) -> WorldMeasure:
    mode = _MODE_ALIASES.get(mode, mode)
    leaves = tree.leaves()
    if mode == SINGLE:
        return WorldMeasure(SINGLE, {n.label: n.born_weight for n in leaves})
    if mode != DOUBLE:
        raise BranchingError(f"unknown mode {mode!r}")
    if tree.protocol is None:
        raise BranchingError("double normalization needs the tree's awakening protocol")
    days = tree.protocol.days()
    cells = {}
    for n in leaves:
        awake = _leaf_days(n)
        for d in days:
            if d in awake:
                cells[(n.label, d)] = n.born_weight
    norm = sum(cells.values(), Fraction(0))
    weights = {n.label: Fraction(0) for n in leaves}
    for (label, _), w in cells.items():
        weights[label] += w / norm
    return WorldMeasure(DOUBLE, weights, erroneous=DOUBLE_FLAG)


def _leaf_labels(tree: WorldTree, event) -> list[str]:
    if callable(event):
        return [n.label for n in tree.leaves() if event(n)]
    if isinstance(event, str):
        event = [event]
    labels = {n.label for n in tree.leaves()}
    unknown = set(event) - labels
    if unknown:
        raise BranchingError(f"unknown worlds {sorted(unknown)}")
    return list(event)


def world_credence(tree: WorldTree, event, mode: str = SINGLE) -> Fraction:
    """Credence in a set of leaves (labels, one label, or a node predicate)."""
    return world_measure(tree, mode).prob(_leaf_labels(tree, event))


def world_event(tree: WorldTree, outcome: str):
    """Predicate selecting worlds whose label contains ``outcome``."""
    return lambda node: outcome in node.label.split("∧")


@dataclass(frozen=True)
class SetupComparison:
    setup: str
    objective_mo: Fraction  # P̃(Mo): a Monday awakening occurs (in some world)
    credence_mo: Fraction  # P(Mo) from inside an awakening
    worlds: int
    born_mo: Fraction  # Born weight of the worlds holding a Monday awakening


@dataclass(frozen=True)
class QTossComparison:
    sbp_tail: SetupComparison
    second_q_toss: SetupComparison

    @property
    def rows(self):
        return (self.sbp_tail, self.second_q_toss)


def _occurs(tree: WorldTree, day: str) -> Fraction:
    # Every world is real: a Monday awakening occurs iff some world has one.
    return Fraction(int(any(day in _leaf_days(n) for n in tree.leaves() if n.born_weight > 0)))


def second_q_toss_compare() -> QTossComparison:
    """Compare waking twice after Tails with a second quantum toss choosing the day.

    Each setup is taken within the Tails world of its full protocol.
    """
    sbp = builtin("quantum_sbp")
    sqt = builtin("second_q_toss")
    rows = []
    for name, protocol, tail in (("SBP-Tail", sbp, "sbp_tail"), ("Second-Q-Toss", sqt, "second_q_toss_tail")):
        tail_protocol = builtin(tail)
        tail_tree = from_quantum_protocol(tail_protocol)
        full_tree = from_quantum_protocol(protocol)
        tails_worlds = [n for n in full_tree.leaves() if world_event(full_tree, "T")(n)]
        tails_weight = sum((n.born_weight for n in tails_worlds), Fraction(0))
        mo_weight = sum((n.born_weight for n in tails_worlds if "Mo" in _leaf_days(n)), Fraction(0))

        space = centered(protocol, HALFER)
        credence_mo = condition(space, day_event(protocol, "Mo"), outcome_event(protocol, "T", "coin"))
        rows.append(
            SetupComparison(
                name,
                _occurs(tail_tree, "Mo"),
                credence_mo,
                len(tails_worlds),
                mo_weight / tails_weight,
            )
        )
    return QTossComparison(*rows)


def classical_agreement(protocol_name: str = "sbp") -> tuple[Fraction, Fraction]:
    """(quantum single-normalization Heads credence, classical objective P(H))."""
    classical = builtin(protocol_name)
    tree = from_quantum_protocol(builtin("quantum_sbp"))
    return world_credence(tree, world_event(tree, "H")), objective(classical, outcome_event(classical, "H"))

