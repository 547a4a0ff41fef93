"""Crowd-vote aggregation, close-call filtering and inter-rater agreement."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import Instance, Relevancy, TirmError, VoteRecord


class LabelingError(TirmError):
    pass


class UndefinedKappaError(LabelingError):
    """Chance agreement is 1, so kappa has a zero denominator."""


@dataclass(frozen=True)
class AggregationPolicy:
    k: float = 0.5
    min_agreement: float = 0.8

    def __post_init__(self):
        if not 0.0 <= self.k < 1.0:
            raise LabelingError(f"vote threshold k={self.k} outside [0, 1)")
        if not 0.5 < self.min_agreement <= 1.0:
            raise LabelingError(f"min_agreement={self.min_agreement} outside (0.5, 1]")


@dataclass(frozen=True)
class VoteDistribution:
    n_5_0: int = 0
    n_4_1: int = 0
    n_3_2: int = 0
    n_relevant: int = 0
    n_nonrelevant: int = 0

    @property
    def total(self) -> int:
        return self.n_5_0 + self.n_4_1 + self.n_3_2

    def as_dict(self) -> dict:
        total = self.total
        pct = (lambda n: round(100.0 * n / total, 2)) if total else (lambda n: 0.0)
        return {
            "total": total,
            "n_5_0": self.n_5_0, "pct_5_0": pct(self.n_5_0),
            "n_4_1": self.n_4_1, "pct_4_1": pct(self.n_4_1),
            "n_3_2": self.n_3_2, "pct_3_2": pct(self.n_3_2),
            "n_relevant": self.n_relevant, "pct_relevant": pct(self.n_relevant),
            "n_nonrelevant": self.n_nonrelevant, "pct_nonrelevant": pct(self.n_nonrelevant),
        }


def relevant_fraction(v: VoteRecord) -> float:
    if not v.votes:
        raise LabelingError("cannot aggregate an empty vote record")
    return v.count(Relevancy.RELEVANT) / len(v.votes)


def aggregate_votes(v: VoteRecord, k: float = 0.5) -> Relevancy:
    """Relevant iff the fraction of Relevant votes is strictly above ``k``."""
    return Relevancy.RELEVANT if relevant_fraction(v) > k else Relevancy.NON_RELEVANT


def majority_label(v: VoteRecord) -> Relevancy:
    # exact ties (even rater counts) go to NonRelevant
    return aggregate_votes(v, 0.5)


def vote_distribution(instances) -> VoteDistribution:
    counts = Counter()
    for inst in instances:
        if inst.votes is None or len(inst.votes.votes) != 5:
            n = 0 if inst.votes is None else len(inst.votes.votes)
            raise LabelingError(f"instance {inst.id}: expected 5 votes, found {n}")
        r = inst.votes.count(Relevancy.RELEVANT)
        counts[{0: "n_5_0", 5: "n_5_0", 1: "n_4_1", 4: "n_4_1"}.get(r, "n_3_2")] += 1
        counts["n_relevant" if r >= 3 else "n_nonrelevant"] += 1
    return VoteDistribution(**counts)


def filter_close_calls(instances, min_agreement: float = 0.8) -> list[tuple[Instance, Relevancy]]:
    """Keep instances whose majority class holds at least ``min_agreement`` of
    the votes, paired with that majority label. Unvoted instances are dropped."""
    kept = []
    for inst in instances:
        if inst.votes is None:
            continue
        frac = relevant_fraction(inst.votes)
        if max(frac, 1.0 - frac) >= min_agreement:
            kept.append((inst, majority_label(inst.votes)))
    return kept


def label_instances(instances, policy: AggregationPolicy) -> list[tuple[Instance, Relevancy]]:
    """Close-call filter at ``policy.min_agreement`` then aggregate at ``policy.k``."""
    return [
        (inst, aggregate_votes(inst.votes, policy.k))
        for inst, _ in filter_close_calls(instances, policy.min_agreement)
    ]


# ---------------------------------------------------------------------------
# agreement statistics


def fleiss_kappa(ratings, n_raters: int | None = None) -> float:
    """Fleiss' kappa for an items x categories matrix of rating counts.

    Computed in exact rationals and rounded once, so hand cases such as 1/3
    come out as the nearest float.
    """
    m = np.asarray(ratings, dtype=float)
    if m.ndim != 2 or m.shape[0] == 0:
        raise LabelingError("ratings must be a non-empty items x categories matrix")
    if (m < 0).any() or not np.isfinite(m).all():
        raise LabelingError("rating counts must be finite and non-negative")
    sums = m.sum(axis=1)
    n = float(sums[0]) if n_raters is None else float(n_raters)
    if n < 2 or not np.all(sums == n):
        raise LabelingError(f"every item must be rated by the same n_raters >= 2 (row sums {sorted(set(sums.tolist()))})")
    rows = [[Fraction(v) for v in row] for row in m.tolist()]
    n = Fraction(n)
    items = len(rows)
    p_j = [sum(col) / (items * n) for col in zip(*rows)]
    p_bar = sum((sum(v * v for v in row) - n) / (n * (n - 1)) for row in rows) / items
    p_e = sum(p * p for p in p_j)
    if p_e == 1:
        raise UndefinedKappaError("all ratings fall in one category; Fleiss' kappa undefined")
    return float((p_bar - p_e) / (1 - p_e))


def cohen_kappa(a, b) -> float:
    """Cohen's kappa between two equally long label sequences."""
    a, b = list(a), list(b)
    if len(a) != len(b) or not a:
        raise LabelingError("cohen_kappa needs two non-empty sequences of equal length")
    n = len(a)
    p_o = Fraction(sum(1 for x, y in zip(a, b) if x == y), n)
    ca, cb = Counter(a), Counter(b)
    p_e = Fraction(sum(ca[c] * cb[c] for c in ca), n * n)
    if p_e == 1:
        raise UndefinedKappaError("both raters used a single identical category; Cohen's kappa undefined")
    return float((p_o - p_e) / (1 - p_e))


def agreement_report(reference: dict[str, VoteRecord], crowd: dict[str, VoteRecord]) -> dict:
    """Compare a reference group's aggregated label against crowd votes.

    For each item, counts how many crowd votes match the reference majority
    label and reports the share of items reaching 3, 4 and 5 matches, plus
    Cohen's kappa between the two majority-label sequences.
    """
    if set(reference) != set(crowd):
        missing = sorted(set(reference) ^ set(crowd))
        raise LabelingError(f"vote sources cover different ids: {missing[:10]}")
    if not reference:
        raise LabelingError("no items to compare")
    ids = sorted(reference)
    ref_labels = [majority_label(reference[i]) for i in ids]
    crowd_labels = [majority_label(crowd[i]) for i in ids]
    matches = [crowd[i].count(lab) for i, lab in zip(ids, ref_labels)]
    n = len(ids)
    report = {
        "n_items": n,
        "agree_3_or_more_pct": round(100.0 * sum(m >= 3 for m in matches) / n, 2),
        "agree_4_or_more_pct": round(100.0 * sum(m >= 4 for m in matches) / n, 2),
        "agree_all_5_pct": round(100.0 * sum(m >= 5 for m in matches) / n, 2),
    }
    try:
        report["cohen_kappa"] = cohen_kappa([x.value for x in ref_labels], [x.value for x in crowd_labels])
    except UndefinedKappaError:
        report["cohen_kappa"] = None
    return report
