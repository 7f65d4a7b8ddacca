"""Pivot clustering and weak-reference training-pair extraction.

A product's reviews are partitioned by repeatedly picking a random pivot
and growing its cluster with the most ROUGE-1-F1-similar remaining reviews:
a review is added while the cluster has fewer than min_rev members or fewer
than max_len accumulated sentences, so the last member may overshoot the
sentence budget. Leftover reviews that cannot seed a cluster of their own
are appended to the most recently formed cluster.

Each cluster's medoid under a similarity function becomes its weak
reference; pairs whose medoid has too many novel stems (word-set precision
below the threshold) are discarded rather than exported.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .config import Config, derive_seed
from .corpus import Corpus, Product, filter_reviews
from .rouge import SimFunction, similarity, word_set_precision
from .textproc import ngrams, tokenize

log = logging.getLogger(__name__)

__all__ = [
    "Cluster",
    "TrainingPair",
    "pivot_cluster",
    "extract_weak_reference",
    "build_training_pair",
    "export_training_pairs",
    "write_training_pairs",
    "TRAINING_INPUT_SEPARATOR",
]

# Reviews of a training input are concatenated in member order with a
# sentence-boundary separator, so downstream tokenization keeps them apart.
TRAINING_INPUT_SEPARATOR = "\n"


@dataclass
class Cluster:
    cluster_id: str
    product_id: str
    pivot_id: str
    member_ids: list[str]
    total_sentences: int
    degenerate: bool = False
    remainder_count: int = 0


@dataclass
class TrainingPair:
    cluster_id: str
    input_review_ids: list[str]
    target_review_id: str
    sim_kind: SimFunction
    sim_score: float
    novel_precision: float


def _rouge1_f1_to_pivot(pivot_counts, pivot_total, other_counts, other_total) -> float:
    if len(other_counts) < len(pivot_counts):
        small, big = other_counts, pivot_counts
    else:
        small, big = pivot_counts, other_counts
    overlap = sum(min(c, big[g]) for g, c in small.items() if g in big)
    p = overlap / other_total if other_total else 0.0
    r = overlap / pivot_total if pivot_total else 0.0
    return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


def pivot_cluster(product: Product, config: Config, rng_seed: int) -> list[Cluster]:
    """Partition a (pre-filtered) product's reviews into pivot clusters."""
    rng = random.Random(rng_seed)
    unclustered = list(product.reviews)
    counts = {}
    for review in unclustered:
        dist = ngrams(tokenize(review.body), 1)
        counts[review.review_id] = (dist.counts, dist.total)

    clusters: list[Cluster] = []
    while unclustered:
        if len(unclustered) < config.min_rev and clusters:
            last = clusters[-1]
            last.member_ids.extend(r.review_id for r in unclustered)
            last.total_sentences += sum(r.sentence_count for r in unclustered)
            last.remainder_count = len(unclustered)
            break
        degenerate = len(unclustered) < config.min_rev
        pivot = unclustered[rng.randrange(len(unclustered))]
        pivot_counts, pivot_total = counts[pivot.review_id]
        scored = sorted(
            (r for r in unclustered if r.review_id != pivot.review_id),
            key=lambda r: (
                -_rouge1_f1_to_pivot(pivot_counts, pivot_total, *counts[r.review_id]),
                r.review_id,
            ),
        )
        members = [pivot]
        total_sentences = pivot.sentence_count
        for review in scored:
            if len(members) >= config.min_rev and total_sentences >= config.max_len:
                break
            members.append(review)
            total_sentences += review.sentence_count
        member_ids = {r.review_id for r in members}
        unclustered = [r for r in unclustered if r.review_id not in member_ids]
        clusters.append(
            Cluster(
                cluster_id=f"{product.product_id}-c{len(clusters):04d}",
                product_id=product.product_id,
                pivot_id=pivot.review_id,
                member_ids=[r.review_id for r in members],
                total_sentences=total_sentences,
                degenerate=degenerate,
            )
        )
    return clusters


def extract_weak_reference(
    cluster: Cluster, product: Product, sim: SimFunction
) -> tuple[str, float]:
    """The member with maximal similarity to the rest; ties go to the
    lexicographically smallest review_id."""
    if len(cluster.member_ids) < 2:
        raise ValueError(f"cluster {cluster.cluster_id} has fewer than 2 members")
    by_id = {r.review_id: r for r in product.reviews}
    tokenized = {rid: tokenize(by_id[rid].body) for rid in cluster.member_ids}
    best_id, best_score = None, -1.0
    for rid in sorted(cluster.member_ids):
        others = [tokenized[o] for o in cluster.member_ids if o != rid]
        score = similarity(sim, tokenized[rid], others)
        if score > best_score:
            best_id, best_score = rid, score
    return best_id, best_score


def build_training_pair(
    cluster: Cluster, product: Product, sim: SimFunction, config: Config
) -> TrainingPair | None:
    """Medoid extraction plus the novel-unigram filter.

    Returns None when the weak reference's word-set precision against the
    rest of the cluster falls below the threshold (strictly below: a pair
    at exactly the threshold is kept).
    """
    medoid_id, score = extract_weak_reference(cluster, product, sim)
    by_id = {r.review_id: r for r in product.reviews}
    input_ids = [rid for rid in cluster.member_ids if rid != medoid_id]
    novel_precision = word_set_precision(
        tokenize(by_id[medoid_id].body), [tokenize(by_id[rid].body) for rid in input_ids]
    )
    if novel_precision < config.novel_precision_min:
        return None
    return TrainingPair(
        cluster_id=cluster.cluster_id,
        input_review_ids=input_ids,
        target_review_id=medoid_id,
        sim_kind=sim,
        sim_score=score,
        novel_precision=novel_precision,
    )


def export_training_pairs(
    corpus: Corpus, config: Config, sim: SimFunction
) -> Iterator[tuple[TrainingPair, Product]]:
    """Stream (pair, filtered product) for every surviving cluster."""
    for product in corpus.products:
        try:
            filtered = filter_reviews(product, config.min_tokens)
            if not filtered.reviews:
                continue
            seed = derive_seed(config.seed, product.product_id)
            for cluster in pivot_cluster(filtered, config, seed):
                if len(cluster.member_ids) < 2:
                    continue
                pair = build_training_pair(cluster, filtered, sim, config)
                if pair is not None:
                    yield pair, filtered
        except Exception:
            log.exception("skipping product %s", product.product_id)


def write_training_pairs(
    corpus: Corpus, config: Config, sim: SimFunction, out_path: str | Path
) -> int:
    """Write the JSON-lines training contract; returns the pair count."""
    written = 0
    with Path(out_path).open("w", encoding="utf-8") as handle:
        for pair, product in export_training_pairs(corpus, config, sim):
            by_id = {r.review_id: r for r in product.reviews}
            record = {
                "cluster_id": pair.cluster_id,
                "input": TRAINING_INPUT_SEPARATOR.join(
                    by_id[rid].body for rid in pair.input_review_ids
                ),
                "target": by_id[pair.target_review_id].body,
                "sim_score": pair.sim_score,
                "novel_precision": pair.novel_precision,
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
            written += 1
    return written
