"""Gold-vs-Auto apparatus: score tuple sets and synthesize degraded ones.

The matcher is a documented simplification of benchmark-toolkit matching:
exact unordered entity pairs plus a token-Jaccard threshold on relations,
greedy one-to-one in canonical order. The degradation operator drops gold
tuples and injects spurious ones to hit a target (precision, recall)
operating point, deterministically in the seed.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .extraction import Tuple, TupleSet

_TOKEN_RE = re.compile(r"[a-z0-9']+")


class QualityError(Exception):
    """Base class for scoring and degradation failures."""


class DegradationSpecError(QualityError):
    """A target (precision, recall) pair cannot be realized."""


@dataclass(frozen=True)
class MatchCriterion:
    """Exact entity-pair equality plus relation token-Jaccard >= theta."""

    theta: float = 0.5

    def __post_init__(self) -> None:
        if not (0 < self.theta <= 1):
            raise QualityError("theta must be in (0, 1]")

    def relations_match(self, a: str, b: str) -> bool:
        ta, tb = set(_TOKEN_RE.findall(a.casefold())), set(_TOKEN_RE.findall(b.casefold()))
        if not ta and not tb:
            return True
        union = len(ta | tb)
        return len(ta & tb) / union >= self.theta


@dataclass(frozen=True)
class QualityReport:
    """Measured precision/recall with the underlying counts."""

    precision: float
    recall: float
    matched: int
    system_size: int
    gold_size: int

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "matched": self.matched,
            "system_size": self.system_size,
            "gold_size": self.gold_size,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QualityReport":
        return cls(
            precision=d["precision"],
            recall=d["recall"],
            matched=d["matched"],
            system_size=d["system_size"],
            gold_size=d["gold_size"],
        )


@dataclass(frozen=True)
class DegradationSpec:
    """Target operating point for a synthetic low-quality tuple set."""

    target_precision: float
    target_recall: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0 < self.target_precision <= 1):
            raise DegradationSpecError("target_precision must be in (0, 1]")
        if not (0 <= self.target_recall <= 1):
            raise DegradationSpecError("target_recall must be in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "precision": self.target_precision,
            "recall": self.target_recall,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DegradationSpec":
        return cls(
            target_precision=d["precision"],
            target_recall=d["recall"],
            seed=d.get("seed", 0),
        )


def match_tuples(
    system: TupleSet, gold: TupleSet, criterion: MatchCriterion | None = None
) -> tuple[int, list[tuple[int, int]]]:
    """Greedy one-to-one matching of system tuples against gold tuples.

    A system tuple matches an unconsumed gold tuple iff their unordered
    entity pairs are equal and their relations clear the Jaccard threshold.
    Both sides are visited in canonical order; each gold tuple is consumed
    at most once. Returns (matched count, list of (system, gold) index pairs).
    """
    criterion = criterion or MatchCriterion()
    gold_by_pair: dict[tuple[str, str], list[int]] = {}
    for gi, gt in enumerate(gold.tuples):
        gold_by_pair.setdefault(gt.pair(), []).append(gi)
    consumed: set[int] = set()
    pairs: list[tuple[int, int]] = []
    for si, st in enumerate(system.tuples):
        for gi in gold_by_pair.get(st.pair(), ()):
            if gi in consumed:
                continue
            if criterion.relations_match(st.relation, gold.tuples[gi].relation):
                consumed.add(gi)
                pairs.append((si, gi))
                break
    return len(pairs), pairs


def score(
    system: TupleSet, gold: TupleSet, criterion: MatchCriterion | None = None
) -> QualityReport:
    """Precision and recall of a system tuple set against a gold one."""
    matched, _ = match_tuples(system, gold, criterion)
    system_size, gold_size = len(system), len(gold)
    return QualityReport(
        precision=matched / system_size if system_size else 0.0,
        recall=matched / gold_size if gold_size else 0.0,
        matched=matched,
        system_size=system_size,
        gold_size=gold_size,
    )


def _round_half_up(value: Fraction) -> int:
    """Exact half-up rounding; ties (x.5) round toward +infinity."""
    return math.floor(value + Fraction(1, 2))


def _as_fraction(x: float) -> Fraction:
    # repr() gives the shortest decimal that round-trips, so targets written
    # as short decimals (0.7, 0.31) are treated exactly.
    return Fraction(repr(float(x)))


def degradation_counts(gold_size: int, spec: DegradationSpec) -> tuple[int, int]:
    """(kept, spurious) counts realizing the target operating point.

    kept = round_half_up(R * |gold|); spurious = round_half_up(kept * (1-P)/P).
    """
    if gold_size < 1:
        raise DegradationSpecError("gold set must contain at least one tuple")
    p = _as_fraction(spec.target_precision)
    r = _as_fraction(spec.target_recall)
    kept = _round_half_up(r * gold_size)
    if kept == 0 and p < 1:
        raise DegradationSpecError(
            f"recall {spec.target_recall} keeps zero tuples from {gold_size}; "
            "cannot realize a precision target below 1 with no true positives"
        )
    spurious = _round_half_up(kept * (1 - p) / p)
    return kept, spurious


def degrade(gold: TupleSet, spec: DegradationSpec) -> TupleSet:
    """Synthesize a lower-quality tuple set from a gold one.

    Keeps a uniform seeded sample of gold tuples and injects spurious
    tuples whose entity pairs are drawn from gold entities but absent from
    gold (so they can never match), with relations built by token-shuffling
    a sampled gold relation. Same seed, same output.
    """
    kept_count, spurious_count = degradation_counts(len(gold), spec)
    rng = np.random.default_rng(spec.seed)

    kept_idx = sorted(rng.choice(len(gold), size=kept_count, replace=False).tolist())
    kept = [gold.tuples[i] for i in kept_idx]

    injected: list[Tuple] = []
    if spurious_count:
        entities = gold.entities()
        gold_pairs = gold.pairs()
        free_pairs = _sample_absent_pairs(entities, gold_pairs, spurious_count, rng)
        donor_idx = rng.integers(0, len(gold), size=spurious_count)
        for (a, b), di in zip(free_pairs, donor_idx.tolist()):
            donor = gold.tuples[di]
            tokens = donor.relation.split()
            shuffled = [tokens[i] for i in rng.permutation(len(tokens)).tolist()]
            injected.append(
                Tuple(
                    entity1=a,
                    entity2=b,
                    relation=" ".join(shuffled),
                    snippet=donor.snippet,
                    anchor=donor.anchor,
                    salience=donor.salience,
                )
            )
    return TupleSet.from_iterable(kept + injected)


def _sample_absent_pairs(
    entities: list[str],
    gold_pairs: set[tuple[str, str]],
    count: int,
    rng: np.random.Generator,
) -> list[tuple[str, str]]:
    """Sample ``count`` distinct unordered entity pairs not present in gold."""
    n = len(entities)
    capacity = n * (n - 1) // 2 - len(gold_pairs)
    if capacity < count:
        raise DegradationSpecError(
            f"cannot inject {count} spurious tuples: only {capacity} unused entity pairs"
        )
    total_pairs = n * (n - 1) // 2
    if total_pairs <= 2_000_000:
        candidates = []
        for i in range(n):
            for j in range(i + 1, n):
                pair = (entities[i], entities[j])
                if pair not in gold_pairs:
                    candidates.append(pair)
        chosen = rng.choice(len(candidates), size=count, replace=False)
        return [candidates[i] for i in sorted(chosen.tolist())]
    # Large pair space: rejection sampling, still deterministic in the seed.
    picked: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    while len(picked) < count:
        i, j = rng.integers(0, n, size=2).tolist()
        if i == j:
            continue
        a, b = entities[min(i, j)], entities[max(i, j)]
        pair = (a, b)
        if pair in gold_pairs or pair in seen:
            continue
        seen.add(pair)
        picked.append(pair)
    return picked
