"""Review corpus ingestion, filtering, statistics and persistence.

Input is tab-separated with a configurable column map (defaulting to the
public Amazon review-dump column order). Malformed rows are counted and
skipped, never fatal. The normalized representation is JSON-lines, one
review per line, with gzip-transparent reads.
"""

from __future__ import annotations

import csv
import gzip
import io
import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .textproc import split_sentences, whitespace_token_count

log = logging.getLogger(__name__)

__all__ = [
    "Review",
    "Product",
    "Corpus",
    "CorpusStats",
    "IngestionError",
    "ColumnMapError",
    "DEFAULT_COLUMNS",
    "make_review",
    "ingest_tsv",
    "filter_reviews",
    "corpus_stats",
    "split_products",
    "save_corpus",
    "load_corpus",
]

# Public Amazon review dump column order.
DEFAULT_COLUMNS = {
    "review_id": 2,
    "product_id": 3,
    "product_title": 5,
    "product_category": 6,
    "star_rating": 7,
    "review_headline": 12,
    "review_body": 13,
}

REQUIRED_FIELDS = ("review_id", "product_id", "star_rating", "review_body")

SIZE_BUCKETS = (
    ("1-9", 1, 9),
    ("10-99", 10, 99),
    ("100-999", 100, 999),
    ("1000-9999", 1000, 9999),
    (">=10000", 10000, None),
)


class IngestionError(RuntimeError):
    pass


class ColumnMapError(ValueError):
    pass


@dataclass
class Review:
    review_id: str
    product_id: str
    star_rating: int
    title: str
    body: str
    token_count: int = 0
    sentence_count: int = 0


@dataclass
class Product:
    product_id: str
    category: str = ""
    title: str = ""
    reviews: list[Review] = field(default_factory=list)


@dataclass
class Corpus:
    products: list[Product] = field(default_factory=list)
    skipped_rows: int = 0

    def __len__(self) -> int:
        return len(self.products)

    def total_reviews(self) -> int:
        return sum(len(p.reviews) for p in self.products)

    def iter_reviews(self) -> Iterator[Review]:
        for product in self.products:
            yield from product.reviews

    def review_map(self) -> dict[str, Review]:
        return {r.review_id: r for r in self.iter_reviews()}


def make_review(review_id: str, product_id: str, star_rating: int, title: str, body: str) -> Review:
    """Construct a Review with token and sentence counts filled in."""
    return Review(
        review_id=review_id,
        product_id=product_id,
        star_rating=star_rating,
        title=title,
        body=body,
        token_count=whitespace_token_count(body),
        sentence_count=len(split_sentences(body)),
    )


def ingest_tsv(path: str | Path, column_map: dict[str, int] | None = None) -> Corpus:
    columns = dict(column_map) if column_map else dict(DEFAULT_COLUMNS)
    missing = [f for f in REQUIRED_FIELDS if f not in columns]
    if missing:
        raise ColumnMapError(f"column_map missing required fields: {missing}")
    max_index = max(columns.values())

    path = Path(path)
    try:
        handle = _open_text(path)
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc

    products: dict[str, Product] = {}
    seen_ids: set[str] = set()
    skipped = 0
    first_row = True
    with handle:
        reader = csv.reader(handle, delimiter="\t", quoting=csv.QUOTE_NONE)
        for row in reader:
            if first_row:
                first_row = False
                if row and max_index >= len(row):
                    raise ColumnMapError(
                        f"column_map references column {max_index} but rows have {len(row)}"
                    )
            if max_index >= len(row):
                skipped += 1
                continue
            review_id = row[columns["review_id"]].strip()
            product_id = row[columns["product_id"]].strip()
            try:
                rating = int(row[columns["star_rating"]])
            except ValueError:
                skipped += 1
                continue
            if not review_id or not product_id or not 1 <= rating <= 5 or review_id in seen_ids:
                skipped += 1
                continue
            seen_ids.add(review_id)
            title = row[columns["review_headline"]] if "review_headline" in columns else ""
            review = make_review(review_id, product_id, rating, title, row[columns["review_body"]])
            product = products.get(product_id)
            if product is None:
                product = Product(
                    product_id=product_id,
                    category=row[columns["product_category"]] if "product_category" in columns else "",
                    title=row[columns["product_title"]] if "product_title" in columns else "",
                )
                products[product_id] = product
            product.reviews.append(review)
    if skipped:
        log.info("ingest: skipped %d malformed rows", skipped)
    return Corpus(products=list(products.values()), skipped_rows=skipped)


def filter_reviews(product: Product, min_tokens: int, max_tokens: int | None = None) -> Product:
    """Keep reviews with min_tokens <= token_count (<= max_tokens if given)."""
    if min_tokens < 0:
        raise ValueError("min_tokens must be >= 0")
    kept = [
        r
        for r in product.reviews
        if r.token_count >= min_tokens and (max_tokens is None or r.token_count <= max_tokens)
    ]
    return Product(product_id=product.product_id, category=product.category, title=product.title, reviews=kept)


@dataclass
class BucketStat:
    label: str
    product_count: int = 0
    product_ratio: float = 0.0
    review_count: int = 0
    review_ratio: float = 0.0


@dataclass
class CategoryStat:
    category: str
    num_products: int
    reviews_max: int
    reviews_avg: float
    reviews_median: int
    words_max: int
    words_avg: float
    words_median: int


@dataclass
class CorpusStats:
    buckets: list[BucketStat]
    categories: list[CategoryStat]
    total_products: int
    total_reviews: int


def _median_low(values: list[int]) -> int:
    # lower-middle element for even counts: deterministic on integer data
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def corpus_stats(corpus: Corpus) -> CorpusStats:
    buckets = [BucketStat(label=label) for label, _, _ in SIZE_BUCKETS]
    for product in corpus.products:
        n = len(product.reviews)
        for stat, (_, lo, hi) in zip(buckets, SIZE_BUCKETS):
            if (hi is None and n >= lo) or (hi is not None and n <= hi):
                stat.product_count += 1
                stat.review_count += n
                break
    total_products = len(corpus.products)
    total_reviews = corpus.total_reviews()
    for stat in buckets:
        stat.product_ratio = stat.product_count / total_products if total_products else 0.0
        stat.review_ratio = stat.review_count / total_reviews if total_reviews else 0.0

    by_category: dict[str, list[Product]] = {}
    for product in corpus.products:
        by_category.setdefault(product.category, []).append(product)
    categories = []
    for category in sorted(by_category):
        members = by_category[category]
        counts = [len(p.reviews) for p in members]
        words = [r.token_count for p in members for r in p.reviews]
        if not words:
            words = [0]
        categories.append(
            CategoryStat(
                category=category,
                num_products=len(members),
                reviews_max=max(counts),
                reviews_avg=sum(counts) / len(counts),
                reviews_median=_median_low(counts),
                words_max=max(words),
                words_avg=sum(words) / len(words),
                words_median=_median_low(words),
            )
        )
    return CorpusStats(
        buckets=buckets,
        categories=categories,
        total_products=total_products,
        total_reviews=total_reviews,
    )


def split_products(
    corpus: Corpus, fractions: tuple[float, float, float], seed: int
) -> tuple[Corpus, Corpus, Corpus]:
    """Random disjoint train/valid/test split, deterministic per seed.

    Fractions are either integer counts summing to the product count, or
    ratios summing to 1.
    """
    if len(fractions) != 3 or any(f < 0 for f in fractions):
        raise ValueError("fractions must be three non-negative numbers")
    n = len(corpus.products)
    total = sum(fractions)
    if all(float(f).is_integer() for f in fractions) and int(total) == n and total > 0:
        counts = [int(f) for f in fractions]
    elif abs(total - 1.0) < 1e-9:
        counts = [int(f * n) for f in fractions]
        counts[0] += n - sum(counts)  # remainder goes to train
    elif total > n:
        raise ValueError(f"requested {int(total)} products but corpus has {n}")
    else:
        raise ValueError("fractions must be counts summing to the product count or ratios summing to 1")

    order = list(corpus.products)
    random.Random(seed).shuffle(order)
    train = order[: counts[0]]
    valid = order[counts[0] : counts[0] + counts[1]]
    test = order[counts[0] + counts[1] :]
    return Corpus(products=train), Corpus(products=valid), Corpus(products=test)


REVIEWS_FILENAME = "reviews.jsonl"


def save_corpus(corpus: Corpus, out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / REVIEWS_FILENAME
    with path.open("w", encoding="utf-8") as handle:
        for product in corpus.products:
            for r in product.reviews:
                record = {
                    "review_id": r.review_id,
                    "product_id": r.product_id,
                    "category": product.category,
                    "product_title": product.title,
                    "star_rating": r.star_rating,
                    "title": r.title,
                    "body": r.body,
                    "token_count": r.token_count,
                    "sentence_count": r.sentence_count,
                }
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    return path


def _open_text(path: Path):
    with path.open("rb") as probe:
        magic = probe.read(2)
    if magic == b"\x1f\x8b":
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return path.open("r", encoding="utf-8", newline="")


def load_corpus(path: str | Path) -> Corpus:
    """Load a saved corpus from a directory or a .jsonl/.jsonl.gz file."""
    path = Path(path)
    if path.is_dir():
        for name in (REVIEWS_FILENAME, REVIEWS_FILENAME + ".gz"):
            if (path / name).exists():
                path = path / name
                break
        else:
            raise IngestionError(f"no {REVIEWS_FILENAME} in {path}")
    if not path.exists():
        raise IngestionError(f"no such corpus: {path}")
    products: dict[str, Product] = {}
    with _open_text(path) as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            product = products.get(rec["product_id"])
            if product is None:
                product = Product(
                    product_id=rec["product_id"],
                    category=rec.get("category", ""),
                    title=rec.get("product_title", ""),
                )
                products[rec["product_id"]] = product
            product.reviews.append(
                Review(
                    review_id=rec["review_id"],
                    product_id=rec["product_id"],
                    star_rating=rec["star_rating"],
                    title=rec.get("title", ""),
                    body=rec["body"],
                    token_count=rec["token_count"],
                    sentence_count=rec["sentence_count"],
                )
            )
    return Corpus(products=list(products.values()))
