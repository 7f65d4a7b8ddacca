"""Sampling-bias analysis: how well do small random samples of a review set
preserve its content n-gram statistics?

For each sample size the module draws repeated samples without replacement,
builds content-only n-gram relative-frequency vectors over the full set's
vocabulary, and reports the Pearson and Spearman correlation with the full
distribution plus the rate at which the full set's top n-gram stays in the
sample's top-5. Results are averaged across samples and products and
emitted as plot-ready TSV.
"""

from __future__ import annotations

import logging
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import derive_seed
from .corpus import Product
from .textproc import ngrams, tokenize

log = logging.getLogger(__name__)

__all__ = [
    "CorrelationPoint",
    "sample_correlation_curve",
    "top_ngram_hit_rate",
    "emit_curves",
    "pearson",
    "spearman",
]


@dataclass
class CorrelationPoint:
    sample_size: int
    n: int
    pearson: float
    spearman: float
    top5_hit_rate: float
    num_samples_averaged: int


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.array_equal(x, y):
        return 1.0
    xm = x - x.mean()
    ym = y - y.mean()
    denom = np.sqrt((xm * xm).sum() * (ym * ym).sum())
    if denom == 0.0:
        return 0.0
    return float(np.clip((xm * ym).sum() / denom, -1.0, 1.0))


def _average_ranks(v: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties assigned their average rank."""
    order = np.argsort(v, kind="stable")
    ranks = np.empty(len(v), dtype=float)
    i = 0
    sorted_v = v[order]
    while i < len(v):
        j = i
        while j + 1 < len(v) and sorted_v[j + 1] == sorted_v[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.array_equal(x, y):
        return 1.0
    return pearson(_average_ranks(x), _average_ranks(y))


def _product_ngram_counters(product: Product, n_values: Sequence[int]) -> dict[int, list[Counter]]:
    per_review: dict[int, list[Counter]] = {n: [] for n in n_values}
    for review in product.reviews:
        tokenized = tokenize(review.body)
        for n in n_values:
            per_review[n].append(ngrams(tokenized, n, content_only=True).counts)
    return per_review


def _top_gram(counter: Counter):
    # max count, lexicographically smallest gram on ties
    return min(counter.items(), key=lambda kv: (-kv[1], kv[0]))[0]


def _curves(
    products: Sequence[Product],
    sizes: Sequence[int],
    n_values: Sequence[int],
    samples_per_size: int,
    top_k: int,
    seed: int,
) -> list[CorrelationPoint]:
    sums: dict[tuple[int, int], list[float]] = {
        (s, n): [0.0, 0.0, 0.0, 0] for s in sizes for n in n_values
    }
    for product in products:
        num_reviews = len(product.reviews)
        per_review = _product_ngram_counters(product, n_values)
        full: dict[int, Counter] = {}
        vocab: dict[int, dict] = {}
        full_vec: dict[int, np.ndarray] = {}
        top1: dict[int, tuple] = {}
        for n in n_values:
            total = Counter()
            for counter in per_review[n]:
                total.update(counter)
            if not total:
                log.warning(
                    "product %s has no content %d-grams; skipped", product.product_id, n
                )
                continue
            full[n] = total
            vocab[n] = {gram: i for i, gram in enumerate(sorted(total))}
            vec = np.zeros(len(vocab[n]))
            grand = sum(total.values())
            for gram, count in total.items():
                vec[vocab[n][gram]] = count / grand
            full_vec[n] = vec
            top1[n] = _top_gram(total)

        for s in sizes:
            if s > num_reviews:
                log.warning(
                    "product %s has %d reviews; skipped for sample size %d",
                    product.product_id,
                    num_reviews,
                    s,
                )
                continue
            for sample_idx in range(samples_per_size):
                rng = random.Random(derive_seed(seed, product.product_id, s, sample_idx))
                chosen = rng.sample(range(num_reviews), s)
                for n in n_values:
                    if n not in full:
                        continue
                    sample = Counter()
                    for i in chosen:
                        sample.update(per_review[n][i])
                    vec = np.zeros(len(vocab[n]))
                    grand = sum(sample.values())
                    if grand:
                        index = vocab[n]
                        for gram, count in sample.items():
                            vec[index[gram]] = count / grand
                    acc = sums[(s, n)]
                    acc[0] += pearson(vec, full_vec[n])
                    acc[1] += spearman(vec, full_vec[n])
                    top_count = sample.get(top1[n], 0)
                    if top_count > 0:
                        strictly_above = sum(1 for c in sample.values() if c > top_count)
                        acc[2] += 1.0 if strictly_above < top_k else 0.0
                    acc[3] += 1

    points = []
    for n in n_values:
        for s in sizes:
            p_sum, s_sum, hit_sum, count = sums[(s, n)]
            if count == 0:
                continue
            points.append(
                CorrelationPoint(
                    sample_size=s,
                    n=n,
                    pearson=p_sum / count,
                    spearman=s_sum / count,
                    top5_hit_rate=hit_sum / count,
                    num_samples_averaged=samples_per_size,
                )
            )
    return points


def sample_correlation_curve(
    products: Sequence[Product],
    sizes: Sequence[int],
    n_values: Sequence[int] = (1, 2, 3),
    samples_per_size: int = 30,
    seed: int = 0,
) -> list[CorrelationPoint]:
    return _curves(products, sizes, n_values, samples_per_size, 5, seed)


def top_ngram_hit_rate(
    products: Sequence[Product],
    sizes: Sequence[int],
    n_values: Sequence[int] = (1, 2, 3),
    samples_per_size: int = 30,
    k: int = 5,
    seed: int = 0,
) -> list[CorrelationPoint]:
    return _curves(products, sizes, n_values, samples_per_size, k, seed)


def emit_curves(points: Sequence[CorrelationPoint], out: str | Path) -> Path:
    out = Path(out)
    lines = ["size\tn\tpearson\tspearman\ttop5_hit_rate"]
    for point in sorted(points, key=lambda p: (p.n, p.sample_size)):
        lines.append(
            f"{point.sample_size}\t{point.n}\t{point.pearson:.6f}"
            f"\t{point.spearman:.6f}\t{point.top5_hit_rate:.6f}"
        )
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out
