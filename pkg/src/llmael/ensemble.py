"""Combine predictions from multiple systems by hard or soft voting."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from functools import lru_cache

from .linker import RankedPrediction


@lru_cache(maxsize=8192)
def _exact(prob: float) -> Decimal:
    # Probabilities travel as decimal JSON text; summing their shortest
    # decimal reading keeps ties exact (0.2+0.7 equals 0.8+0.1), which binary
    # float summation does not.
    return Decimal(repr(prob))


@dataclass(frozen=True)
class VoteInput:
    system: str
    prediction: RankedPrediction


def hard_vote(inputs: list[VoteInput]) -> str | None:
    """Most frequent top-1 entity across systems.

    Frequency ties go to the tied entity with the highest top-1 probability
    any system assigned it; remaining ties break lexicographically by id.
    Systems with no prediction contribute nothing; if all abstain, returns
    None. Order of inputs never matters.
    """
    if not inputs:
        raise ValueError("inputs must be nonempty")
    freq: dict[str, int] = {}
    best_prob: dict[str, float] = {}
    for vote in inputs:
        top = vote.prediction.top1
        if vote.prediction.no_prediction or top is None:
            continue
        entity_id, prob = top
        freq[entity_id] = freq.get(entity_id, 0) + 1
        best_prob[entity_id] = max(best_prob.get(entity_id, 0.0), prob)
    if not freq:
        return None
    return min(freq, key=lambda e: (-freq[e], -best_prob[e], e))


def soft_vote(inputs: list[VoteInput], top1_only: bool = False) -> str | None:
    """Entity with the largest probability mass summed across systems.

    Sums use full candidate distributions (set ``top1_only`` to restrict to
    each system's top candidate). Sums are exact decimal arithmetic, so the
    result is invariant under input permutation and decimal-equal masses tie;
    exact ties break lexicographically by id. All-abstaining inputs yield
    None.
    """
    if not inputs:
        raise ValueError("inputs must be nonempty")
    zero = Decimal(0)
    masses: dict[str, Decimal] = {}
    for vote in inputs:
        if vote.prediction.no_prediction:
            continue
        candidates = vote.prediction.candidates
        if top1_only:
            candidates = candidates[:1]
        for entity_id, prob in candidates:
            masses[entity_id] = masses.get(entity_id, zero) + _exact(prob)
    if not masses:
        return None
    return min(masses, key=lambda e: (-masses[e], e))


def vote_label(mode: str, systems: list[str]) -> str:
    """Serialization label for an ensemble, e.g. "hard-vote(a+b)"."""
    return f"{mode}-vote({'+'.join(systems)})"
