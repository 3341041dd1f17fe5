"""Seeded Monte Carlo over a protocol's branch distribution.

Randomness is counter-based: trial ``i`` reads the Philox4x64-10 blocks
starting at counter ``i * blocks_per_trial`` under key ``seed``.  Trial
outcomes therefore depend only on ``(seed, i)`` and chunked or threaded
execution reproduces a serial run bit for bit.  Philox is the generator
published with the Random123 known-answer vectors; changing it changes
every golden output.

Each randomizer consumes one raw 64-bit word per trial.  An outcome is
chosen by comparing the word with exact integer thresholds
``floor(cumulative_weight * 2**64)``.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .measure import (
    BRANCH,
    THIRDER,
    Event,
    centered,
    objective,
)
from .protocol import Awakening, ExperimentProtocol

PER_EXPERIMENT = "per_experiment"
PER_AWAKENING = "per_awakening"

_WORDS_PER_BLOCK = 4
_SEED_MASK = (1 << 64) - 1


class SamplerError(ValueError):
    pass


@dataclass(frozen=True)
class Trial:
    profile: tuple[str, ...]
    awakenings: tuple[Awakening, ...]


@dataclass(frozen=True, eq=False)
class Ensemble:
    protocol: ExperimentProtocol
    seed: int
    n: int
    outcomes: np.ndarray  # (n, randomizers) outcome indices
    branch_index: np.ndarray  # (n,) index into protocol.branches

    @property
    def trials(self) -> list[Trial]:
        return [self[i] for i in range(self.n)]

    def __len__(self):
        return self.n

    def __getitem__(self, i: int) -> Trial:
        b = self.protocol.branches[int(self.branch_index[i])]
        labels = tuple(r.labels[k] for r, k in zip(self.protocol.randomizers, self.outcomes[i]))
        return Trial(labels, b.awakenings)

    def identical(self, other: Ensemble) -> bool:
        return (
            self.seed == other.seed
            and self.n == other.n
            and self.protocol == other.protocol
            and np.array_equal(self.outcomes, other.outcomes)
        )

    def branch_counts(self) -> np.ndarray:
        return np.bincount(self.branch_index, minlength=len(self.protocol.branches))

    def awakening_counts(self) -> np.ndarray:
        per_branch = np.array([len(b.awakenings) for b in self.protocol.branches], dtype=np.int64)
        return per_branch[self.branch_index]

    def to_delimited(self, delimiter: str = ",") -> str:
        """One row per trial: index, outcome profile, awakening count."""
        buf = io.StringIO()
        writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
        writer.writerow(["index", "profile", "awakenings"])
        counts = self.awakening_counts()
        for i in range(self.n):
            writer.writerow([i, " ".join(self[i].profile), int(counts[i])])
        return buf.getvalue()


def _thresholds(protocol: ExperimentProtocol) -> list[np.ndarray]:
    out = []
    for r in protocol.randomizers:
        cum = Fraction(0)
        edges = []
        for _, w in r.outcomes[:-1]:
            cum += w
            edges.append(math.floor(cum * (1 << 64)))
        out.append(np.array(edges, dtype=np.uint64))
    return out


def _branch_lookup(protocol: ExperimentProtocol) -> np.ndarray:
    sizes = [len(r.outcomes) for r in protocol.randomizers]
    table = np.empty(sizes, dtype=np.int64)
    for idx in np.ndindex(*sizes):
        labels = [r.labels[k] for r, k in zip(protocol.randomizers, idx)]
        table[idx] = protocol.branches.index(protocol.resolve(labels))
    return table


def _blocks_per_trial(protocol: ExperimentProtocol) -> int:
    return -(-len(protocol.randomizers) // _WORDS_PER_BLOCK)


def _sample_chunk(protocol, seed, start, stop, thresholds):
    bpt = _blocks_per_trial(protocol)
    words = bpt * _WORDS_PER_BLOCK
    gen = np.random.Philox(key=seed & _SEED_MASK, counter=start * bpt)
    raw = gen.random_raw((stop - start) * words).reshape(stop - start, words)
    cols = [
        np.searchsorted(edges, raw[:, j], side="right") for j, edges in enumerate(thresholds)
    ]
    return np.stack(cols, axis=1).astype(np.int64)


def run(protocol: ExperimentProtocol, n: int, seed: int, workers: int = 1, chunk_size: int = 65536) -> Ensemble:
    """Sample ``n`` independent trials.

    ``workers`` > 1 splits the trial range into chunks evaluated on a thread
    pool; the result is identical to the serial run.
    """
    if n < 1:
        raise SamplerError("n must be at least 1")
    thresholds = _thresholds(protocol)
    bounds = [(s, min(s + chunk_size, n)) for s in range(0, n, chunk_size)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _sample_chunk(protocol, seed, *b, thresholds), bounds))
    else:
        parts = [_sample_chunk(protocol, seed, s, e, thresholds) for s, e in bounds]
    outcomes = np.concatenate(parts, axis=0)
    lookup = _branch_lookup(protocol)
    branch_index = lookup[tuple(outcomes.T)]
    return Ensemble(protocol, seed, n, outcomes, branch_index)


@dataclass(frozen=True)
class FrequencyEstimate:
    mode: str
    hits: int
    total: int

    @property
    def estimate(self) -> Fraction:
        return Fraction(self.hits, self.total)

    @property
    def stderr(self) -> float:
        f = self.hits / self.total
        return math.sqrt(f * (1 - f) / self.total)


def _branch_mask(ensemble: Ensemble, event) -> np.ndarray:
    branches = ensemble.protocol.branches
    if isinstance(event, Event):
        if event.scope != BRANCH:
            raise SamplerError("per-experiment frequency needs a branch-level event")
        return np.array([b.profile in event.members for b in branches])
    return np.array([bool(event(b)) for b in branches])


def _awakening_hits(ensemble: Ensemble, event) -> np.ndarray:
    """Matching awakenings per branch for a centered event or predicate."""
    branches = ensemble.protocol.branches
    if isinstance(event, Event):
        if event.scope == BRANCH:
            return np.array([len(b.awakenings) if b.profile in event.members else 0 for b in branches])
        return np.array(
            [sum((b.profile, i) in event.members for i in range(len(b.awakenings))) for b in branches]
        )
    return np.array([sum(bool(event(b, i, a)) for i, a in enumerate(b.awakenings)) for b in branches])


def per_experiment_frequency(ensemble: Ensemble, event) -> FrequencyEstimate:
    """Fraction of experiments whose branch satisfies ``event``."""
    counts = ensemble.branch_counts()
    hits = int(counts[_branch_mask(ensemble, event)].sum())
    return FrequencyEstimate(PER_EXPERIMENT, hits, ensemble.n)


def per_awakening_frequency(ensemble: Ensemble, event) -> FrequencyEstimate:
    """Fraction of all sampled awakenings that satisfy ``event``.

    A branch-level event counts every awakening of a matching branch.
    """
    counts = ensemble.branch_counts()
    sizes = np.array([len(b.awakenings) for b in ensemble.protocol.branches])
    total = int(counts @ sizes)
    if total == 0:
        raise SamplerError("no awakenings sampled")
    hits = int(counts @ _awakening_hits(ensemble, event))
    return FrequencyEstimate(PER_AWAKENING, hits, total)


@dataclass(frozen=True)
class ConvergenceResult:
    estimate: FrequencyEstimate
    exact: Fraction
    sigmas: float = 4.0

    @property
    def deviation(self) -> float:
        return abs(float(self.estimate.estimate - self.exact))

    @property
    def passed(self) -> bool:
        return self.deviation <= self.sigmas * self.estimate.stderr

    def __bool__(self):
        return self.passed


def exact_frequency(protocol: ExperimentProtocol, event: Event, mode: str) -> Fraction:
    """The limit a frequency mode converges to.

    Per experiment: the objective probability.  Per awakening: the thirder
    centered measure, i.e. the awakening weight of the event.
    """
    if mode == PER_EXPERIMENT:
        return objective(protocol, event)
    if mode == PER_AWAKENING:
        return centered(protocol, THIRDER).prob(event)
    raise SamplerError(f"unknown mode {mode!r}")


def convergence_check(protocol, event: Event, mode: str, n: int, seed: int, workers: int = 1) -> ConvergenceResult:
    exact = exact_frequency(protocol, event, mode)
    ensemble = run(protocol, n, seed, workers=workers)
    if mode == PER_EXPERIMENT:
        est = per_experiment_frequency(ensemble, event)
    else:
        est = per_awakening_frequency(ensemble, event)
    return ConvergenceResult(est, exact)


@dataclass(frozen=True)
class RewardSummary:
    total: Fraction
    per_trial: Fraction
    share: Fraction  # share of total reward earned in ``event`` trials
    frequency: Fraction  # fraction of trials in ``event``


def reward_summary(ensemble: Ensemble, rewards: dict, event: Event) -> RewardSummary:
    """Pay ``rewards[branch name]`` per trial; compare reward share with frequency.

    Paying 1 per Heads trial and 2 per Tails trial makes Heads earn a third of
    the money while occurring half the time.
    """
    counts = ensemble.branch_counts()
    mask = _branch_mask(ensemble, event)
    total = Fraction(0)
    in_event = Fraction(0)
    for k, b in enumerate(ensemble.protocol.branches):
        r = Fraction(rewards.get(b.name, 0)) * int(counts[k])
        total += r
        if mask[k]:
            in_event += r
    return RewardSummary(
        total,
        total / ensemble.n,
        in_event / total if total else Fraction(0),
        Fraction(int(counts[mask].sum()), ensemble.n),
    )
