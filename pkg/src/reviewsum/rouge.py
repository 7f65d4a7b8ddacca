"""ROUGE-1/2/L and word-set overlap measures, implemented from scratch.

These are the similarity currency of the whole pipeline: pivot clustering,
weak-reference extraction, medoid baselines and evaluation all call into
this module. Scoring is over Porter stems with stopwords retained; n-grams
never cross sentence boundaries; ROUGE-n overlap uses clipped (multiset)
counts.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .textproc import TokenizedText, ngrams, stem_set

__all__ = [
    "RougeScore",
    "SimFunction",
    "rouge_n",
    "rouge_l",
    "rouge_multi",
    "word_set_recall",
    "word_set_precision",
    "avg_rouge1_f1",
    "similarity",
    "lcs_length",
    "METRICS",
]

METRICS = ("rouge1", "rouge2", "rougeL")


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


class SimFunction(str, Enum):
    """Similarity used to pick a cluster's representative review."""

    STEM_SET_RECALL = "recall"
    AVG_ROUGE1_F1 = "f1"


def _score(overlap: float, candidate_total: float, reference_total: float) -> RougeScore:
    p = overlap / candidate_total if candidate_total > 0 else 0.0
    r = overlap / reference_total if reference_total > 0 else 0.0
    f1 = 2.0 * p * r / (p + r) if p + r > 0 else 0.0
    return RougeScore(precision=p, recall=r, f1=f1)


def _clipped_overlap(a: Counter, b: Counter) -> int:
    if len(b) < len(a):
        a, b = b, a
    return sum(min(count, b[gram]) for gram, count in a.items() if gram in b)


def rouge_n(candidate: TokenizedText, reference: TokenizedText, n: int) -> RougeScore:
    """Clipped n-gram overlap over stems; empty side yields 0/0/0."""
    cand = ngrams(candidate, n)
    ref = ngrams(reference, n)
    overlap = _clipped_overlap(cand.counts, ref.counts)
    return _score(overlap, cand.total, ref.total)


def lcs_length(a: Sequence, b: Sequence) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0] * (len(b) + 1)
        for j, y in enumerate(b, 1):
            if x == y:
                curr[j] = prev[j - 1] + 1
            else:
                curr[j] = curr[j - 1] if curr[j - 1] >= prev[j] else prev[j]
        prev = curr
    return prev[-1]


def rouge_l(candidate: TokenizedText, reference: TokenizedText) -> RougeScore:
    """Longest common subsequence over the flattened stem sequences."""
    cand = candidate.flat_stems()
    ref = reference.flat_stems()
    return _score(lcs_length(cand, ref), len(cand), len(ref))


def _single(candidate: TokenizedText, reference: TokenizedText, metric: str) -> RougeScore:
    if metric == "rouge1":
        return rouge_n(candidate, reference, 1)
    if metric == "rouge2":
        return rouge_n(candidate, reference, 2)
    if metric == "rougeL":
        return rouge_l(candidate, reference)
    raise ValueError(f"unknown metric: {metric}")


def rouge_multi(
    candidate: TokenizedText,
    references: Sequence[TokenizedText],
    metric: str = "rouge1",
    aggregate: str = "avg",
) -> RougeScore:
    """Score against several references, combined componentwise."""
    if not references:
        raise ValueError("references must be nonempty")
    if aggregate not in ("avg", "max"):
        raise ValueError(f"unknown aggregate: {aggregate}")
    singles = [_single(candidate, ref, metric) for ref in references]
    if aggregate == "max":
        return RougeScore(
            precision=max(s.precision for s in singles),
            recall=max(s.recall for s in singles),
            f1=max(s.f1 for s in singles),
        )
    k = len(singles)
    return RougeScore(
        precision=sum(s.precision for s in singles) / k,
        recall=sum(s.recall for s in singles) / k,
        f1=sum(s.f1 for s in singles) / k,
    )


def _pool_union(pool: Iterable[TokenizedText]) -> set[str]:
    union: set[str] = set()
    for text in pool:
        union |= stem_set(text)
    return union


def word_set_recall(candidate: TokenizedText, pool: Sequence[TokenizedText]) -> float:
    """How much of the pool's combined stem vocabulary the candidate covers."""
    union = _pool_union(pool)
    if not union:
        return 0.0
    return len(stem_set(candidate) & union) / len(union)


def word_set_precision(candidate: TokenizedText, pool: Sequence[TokenizedText]) -> float:
    """Fraction of the candidate's stems that also occur in the pool."""
    cand = stem_set(candidate)
    if not cand:
        return 0.0
    return len(cand & _pool_union(pool)) / len(cand)


def avg_rouge1_f1(candidate: TokenizedText, pool: Sequence[TokenizedText]) -> float:
    """Mean ROUGE-1 F1 of each pool member scored against the candidate."""
    if not pool:
        raise ValueError("pool must be nonempty")
    cand_counts = ngrams(candidate, 1)
    total = 0.0
    for member in pool:
        member_counts = ngrams(member, 1)
        overlap = _clipped_overlap(member_counts.counts, cand_counts.counts)
        total += _score(overlap, member_counts.total, cand_counts.total).f1
    return total / len(pool)


def similarity(sim: SimFunction, candidate: TokenizedText, pool: Sequence[TokenizedText]) -> float:
    if sim is SimFunction.STEM_SET_RECALL:
        return word_set_recall(candidate, pool)
    return avg_rouge1_f1(candidate, pool)
