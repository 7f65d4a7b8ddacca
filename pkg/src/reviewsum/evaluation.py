"""Multi-reference evaluation: annotation-set splitting, reference
validation, ROUGE scoring with bootstrap confidence intervals, and report
rendering.

Reviews are randomly grouped into annotation sets of up to 50 sentences
(never fewer than two reviews); each set maps to one human reference.
System summaries are scored against all of a product's references, the
per-product F1 means are aggregated, and a percentile bootstrap over
products yields the reported >= 95% intervals.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .config import Config, derive_seed
from .corpus import Corpus, Product
from .rouge import METRICS, RougeScore, rouge_multi
from .textproc import (
    PORTER_VERSION,
    STOPWORDS_VERSION,
    tokenize,
    whitespace_token_count,
)

log = logging.getLogger(__name__)

__all__ = [
    "AnnotationSet",
    "ReferenceSummary",
    "ProductScores",
    "EvalReport",
    "make_annotation_sets",
    "validate_reference",
    "evaluate_system",
    "bootstrap_interval",
    "render_report",
    "format_cell",
    "report_to_dict",
]

AGGREGATES = ("avg", "max")
LONG_COPY_WINDOW = 6
MAX_LINEBREAKS = 3


@dataclass
class AnnotationSet:
    set_id: str
    product_id: str
    review_ids: list[str]
    sentence_total: int


@dataclass
class ReferenceSummary:
    set_id: str
    product_id: str
    text: str
    token_count: int = 0

    def __post_init__(self) -> None:
        if not self.token_count:
            self.token_count = whitespace_token_count(self.text)


def make_annotation_sets(product: Product, config: Config, seed: int) -> list[AnnotationSet]:
    """Randomly partition a product's reviews into sets of up to
    `annotation_max_sentences` sentences, each with at least two reviews.
    A trailing single-review set is merged into its predecessor."""
    reviews = list(product.reviews)
    if len(reviews) < 2:
        raise ValueError(
            f"product {product.product_id}: need >= 2 reviews for annotation sets"
        )
    rng = random.Random(seed)
    rng.shuffle(reviews)
    groups: list[list] = [[]]
    sentence_totals = [0]
    for review in reviews:
        current, total = groups[-1], sentence_totals[-1]
        if len(current) < 2 or total + review.sentence_count <= config.annotation_max_sentences:
            current.append(review)
            sentence_totals[-1] += review.sentence_count
        else:
            groups.append([review])
            sentence_totals.append(review.sentence_count)
    if len(groups) > 1 and len(groups[-1]) < 2:
        last_total = sentence_totals.pop()
        groups[-2].extend(groups.pop())
        sentence_totals[-1] += last_total
    return [
        AnnotationSet(
            set_id=f"{product.product_id}-s{i:03d}",
            product_id=product.product_id,
            review_ids=[r.review_id for r in group],
            sentence_total=sum(r.sentence_count for r in group),
        )
        for i, group in enumerate(groups)
    ]


def _flat_tokens(text: str) -> list[str]:
    return [t for sent in tokenize(text).sentences for t in sent]


def validate_reference(
    reference: ReferenceSummary,
    source_set: AnnotationSet,
    corpus: Corpus,
    config: Config | None = None,
) -> list[str]:
    """Violations among TooShort, VerbatimExtract, LongCopy, ExcessLinebreaks."""
    config = config or Config()
    reviews = corpus.review_map()
    sources = [reviews[rid] for rid in source_set.review_ids if rid in reviews]
    violations = []
    if whitespace_token_count(reference.text) < config.ref_min_tokens:
        violations.append("TooShort")
    normalized = " ".join(reference.text.split()).lower()
    if any(normalized and normalized in " ".join(r.body.split()).lower() for r in sources):
        violations.append("VerbatimExtract")
    summary_tokens = _flat_tokens(reference.text)
    windows = {
        tuple(summary_tokens[i : i + LONG_COPY_WINDOW])
        for i in range(len(summary_tokens) - LONG_COPY_WINDOW + 1)
    }
    if windows:
        for review in sources:
            tokens = _flat_tokens(review.body)
            review_windows = {
                tuple(tokens[i : i + LONG_COPY_WINDOW])
                for i in range(len(tokens) - LONG_COPY_WINDOW + 1)
            }
            if windows & review_windows:
                violations.append("LongCopy")
                break
    if reference.text.count("\n") > MAX_LINEBREAKS:
        violations.append("ExcessLinebreaks")
    return violations


@dataclass
class ProductScores:
    product_id: str
    # metric -> aggregate -> RougeScore
    scores: dict[str, dict[str, RougeScore]] = field(default_factory=dict)


@dataclass
class EvalReport:
    per_product: list[ProductScores]
    # metric -> aggregate -> {"mean_f1", "ci_lower", "ci_upper", "halfwidth"}
    aggregates: dict[str, dict[str, dict[str, float]]]
    excluded_products: list[str]
    metadata: dict


def bootstrap_interval(
    values: Sequence[float], iters: int = 1000, seed: int = 0
) -> tuple[float, float]:
    """Percentile bootstrap (2.5/97.5) of the mean, resampling with
    replacement."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return 0.0, 0.0
    if arr.size == 1:
        return float(arr[0]), float(arr[0])
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, arr.size, size=(iters, arr.size))
    means = arr[idx].mean(axis=1)
    lower, upper = np.percentile(means, [2.5, 97.5])
    return float(lower), float(upper)


def evaluate_system(
    summaries: Mapping[str, str],
    references: Mapping[str, Sequence[ReferenceSummary]],
    bootstrap_iters: int = 1000,
    seed: int = 0,
    config: Config | None = None,
) -> EvalReport:
    """Score each product's summary against all its references and
    aggregate with bootstrap intervals over products."""
    per_product: list[ProductScores] = []
    excluded = []
    for product_id in sorted(summaries):
        refs = list(references.get(product_id, ()))
        if not refs:
            excluded.append(product_id)
            continue
        candidate = tokenize(summaries[product_id])
        ref_tokens = [tokenize(ref.text) for ref in refs]
        entry = ProductScores(product_id=product_id)
        for metric in METRICS:
            entry.scores[metric] = {
                agg: rouge_multi(candidate, ref_tokens, metric, agg) for agg in AGGREGATES
            }
        per_product.append(entry)
    if excluded:
        log.warning("excluded %d products without references", len(excluded))

    aggregates: dict[str, dict[str, dict[str, float]]] = {}
    for metric in METRICS:
        aggregates[metric] = {}
        for agg in AGGREGATES:
            f1s = [entry.scores[metric][agg].f1 for entry in per_product]
            mean = sum(f1s) / len(f1s) if f1s else 0.0
            lower, upper = bootstrap_interval(
                f1s, iters=bootstrap_iters, seed=derive_seed(seed, metric, agg)
            )
            aggregates[metric][agg] = {
                "mean_f1": mean,
                "ci_lower": lower,
                "ci_upper": upper,
                "halfwidth": (upper - lower) / 2.0,
            }
    metadata = {
        "stemmer_version": PORTER_VERSION,
        "stopwords_version": STOPWORDS_VERSION,
        "seed": seed,
        "bootstrap_iters": bootstrap_iters,
        "interval_method": "percentile bootstrap over products (2.5/97.5)",
        "config": (config or Config()).to_dict(),
        "num_products": len(per_product),
    }
    return EvalReport(
        per_product=per_product,
        aggregates=aggregates,
        excluded_products=excluded,
        metadata=metadata,
    )


def format_cell(score: float, halfwidth: float) -> str:
    """Table cell as percent with two decimals, e.g. '28.81 (±1.11)'."""
    return f"{100.0 * score:.2f} (±{100.0 * halfwidth:.2f})"


def render_report(reports: Sequence[tuple[str, EvalReport]], aggregate: str = "avg") -> str:
    """TSV table, one row per system, ROUGE-1/2/L F1 columns."""
    lines = ["Model\tROUGE-1\tROUGE-2\tROUGE-L"]
    for name, report in reports:
        cells = [
            format_cell(
                report.aggregates[metric][aggregate]["mean_f1"],
                report.aggregates[metric][aggregate]["halfwidth"],
            )
            for metric in METRICS
        ]
        lines.append("\t".join([name, *cells]))
    return "\n".join(lines) + "\n"


def report_to_dict(report: EvalReport) -> dict:
    return {
        "per_product": [
            {
                "product_id": entry.product_id,
                "scores": {
                    metric: {
                        agg: {
                            "precision": s.precision,
                            "recall": s.recall,
                            "f1": s.f1,
                        }
                        for agg, s in by_agg.items()
                    }
                    for metric, by_agg in entry.scores.items()
                },
            }
            for entry in report.per_product
        ],
        "aggregates": report.aggregates,
        "excluded_products": report.excluded_products,
        "metadata": report.metadata,
    }
