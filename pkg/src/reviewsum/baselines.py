"""Reference systems: medoid selection, shuffled lead sentences, and
cluster-then-medoid combinations.

All baselines see only reviews within the [min_tokens, max_tokens_baseline]
word window and return verbatim corpus text.
"""

from __future__ import annotations

import random
from enum import Enum

from .clustering import extract_weak_reference, pivot_cluster
from .config import Config
from .corpus import Product, filter_reviews
from .rouge import SimFunction, similarity
from .textproc import split_sentences, tokenize, whitespace_token_count

__all__ = [
    "BaselineKind",
    "medoid_baseline",
    "multi_lead_1",
    "cluster_medoid_baseline",
    "run_baseline",
]


class BaselineKind(str, Enum):
    MEDOID_RECALL = "medoid-recall"
    MEDOID_F1 = "medoid-f1"
    MULTI_LEAD_1 = "multi-lead-1"
    CLUSTER_MEDOID_F1 = "cluster-medoid-f1"
    CLUSTER_MEDOID_RECALL = "cluster-medoid-recall"


def _eligible(product: Product, config: Config) -> Product:
    return filter_reviews(product, config.min_tokens, config.max_tokens_baseline)


def medoid_baseline(product: Product, sim: SimFunction, config: Config) -> str:
    """Full text of the review most similar to all other reviews."""
    eligible = _eligible(product, config)
    if len(eligible.reviews) < 2:
        raise ValueError(
            f"product {product.product_id}: need >= 2 eligible reviews, "
            f"have {len(eligible.reviews)}"
        )
    tokenized = {r.review_id: tokenize(r.body) for r in eligible.reviews}
    best, best_score = None, -1.0
    for review in sorted(eligible.reviews, key=lambda r: r.review_id):
        pool = [tokenized[o.review_id] for o in eligible.reviews if o.review_id != review.review_id]
        score = similarity(sim, tokenized[review.review_id], pool)
        if score > best_score:
            best, best_score = review, score
    return best.body


def multi_lead_1(product: Product, config: Config, seed: int) -> str:
    """First sentences of shuffled reviews, stopping before the token limit
    is passed; a single oversized first sentence gets truncated instead."""
    eligible = _eligible(product, config)
    if not eligible.reviews:
        raise ValueError(f"product {product.product_id}: no eligible reviews")
    order = list(eligible.reviews)
    random.Random(seed).shuffle(order)
    picked: list[str] = []
    total = 0
    for review in order:
        sentences = split_sentences(review.body)
        if not sentences:
            continue
        lead = sentences[0]
        count = whitespace_token_count(lead)
        if not picked and count > config.lead_limit:
            picked.append(" ".join(lead.split()[: config.lead_limit]))
            total = config.lead_limit
            break
        if total + count > config.lead_limit:
            break
        picked.append(lead)
        total += count
    return " ".join(picked)


def cluster_medoid_baseline(
    product: Product, final_sim: SimFunction, config: Config, seed: int
) -> str:
    """Cluster, take each cluster's weak reference (ROUGE-1 F1 sim), then
    run the medoid baseline over the weak-reference set."""
    eligible = _eligible(product, config)
    if not eligible.reviews:
        raise ValueError(f"product {product.product_id}: no eligible reviews")
    by_id = {r.review_id: r for r in eligible.reviews}
    weak_refs = []
    for cluster in pivot_cluster(eligible, config, seed):
        if len(cluster.member_ids) == 1:
            weak_refs.append(by_id[cluster.member_ids[0]])
            continue
        medoid_id, _ = extract_weak_reference(cluster, eligible, SimFunction.AVG_ROUGE1_F1)
        weak_refs.append(by_id[medoid_id])
    if len(weak_refs) == 1:
        return weak_refs[0].body
    pseudo = Product(
        product_id=product.product_id,
        category=product.category,
        title=product.title,
        reviews=weak_refs,
    )
    return medoid_baseline(pseudo, final_sim, config)


def run_baseline(kind: BaselineKind, product: Product, config: Config, seed: int) -> str:
    if kind is BaselineKind.MEDOID_RECALL:
        return medoid_baseline(product, SimFunction.STEM_SET_RECALL, config)
    if kind is BaselineKind.MEDOID_F1:
        return medoid_baseline(product, SimFunction.AVG_ROUGE1_F1, config)
    if kind is BaselineKind.MULTI_LEAD_1:
        return multi_lead_1(product, config, seed)
    if kind is BaselineKind.CLUSTER_MEDOID_F1:
        return cluster_medoid_baseline(product, SimFunction.AVG_ROUGE1_F1, config, seed)
    if kind is BaselineKind.CLUSTER_MEDOID_RECALL:
        return cluster_medoid_baseline(product, SimFunction.STEM_SET_RECALL, config, seed)
    raise ValueError(f"unknown baseline: {kind}")
