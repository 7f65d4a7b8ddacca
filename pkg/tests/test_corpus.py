import gzip
import random

import pytest

from reviewsum.corpus import (
    ColumnMapError,
    Corpus,
    IngestionError,
    Product,
    corpus_stats,
    filter_reviews,
    ingest_tsv,
    load_corpus,
    make_review,
    save_corpus,
    split_products,
)

# Amazon dump order: review_id=2, product_id=3, star_rating=7, body=13
def _row(review_id, product_id, rating, body, title="t", category="Books"):
    cols = [""] * 15
    cols[2] = review_id
    cols[3] = product_id
    cols[5] = f"{product_id} title"
    cols[6] = category
    cols[7] = str(rating)
    cols[12] = title
    cols[13] = body
    cols[14] = "2015-01-01"
    return "\t".join(cols)


def _write_tsv(path, rows):
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path


def test_ingest_groups_rows_into_products(tmp_path):
    tsv = _write_tsv(
        tmp_path / "r.tsv",
        [
            _row("R1", "P1", 5, "Nice sound. Works well."),
            _row("R2", "P2", 3, "Average item overall here."),
            _row("R3", "P1", 4, "Good value for money."),
        ],
    )
    corpus = ingest_tsv(tsv)
    assert len(corpus) == 2
    assert corpus.total_reviews() == 3
    assert corpus.skipped_rows == 0
    p1 = next(p for p in corpus.products if p.product_id == "P1")
    assert [r.review_id for r in p1.reviews] == ["R1", "R3"]
    assert p1.category == "Books"


def test_ingest_skips_malformed_rating(tmp_path):
    tsv = _write_tsv(
        tmp_path / "r.tsv",
        [_row("R1", "P1", 5, "Fine."), _row("R2", "P1", "abc", "Bad rating.")],
    )
    corpus = ingest_tsv(tsv)
    assert corpus.total_reviews() == 1
    assert corpus.skipped_rows == 1


def test_ingest_empty_file(tmp_path):
    tsv = tmp_path / "empty.tsv"
    tsv.write_text("", encoding="utf-8")
    corpus = ingest_tsv(tsv)
    assert len(corpus) == 0 and corpus.total_reviews() == 0


def test_ingest_counts_filled(tmp_path):
    tsv = _write_tsv(tmp_path / "r.tsv", [_row("R1", "P1", 5, "One two three. Four five!")])
    review = ingest_tsv(tsv).products[0].reviews[0]
    assert review.token_count == 5
    assert review.sentence_count == 2


def test_ingest_missing_file():
    with pytest.raises(IngestionError):
        ingest_tsv("/no/such/file.tsv")


def test_ingest_bad_column_map(tmp_path):
    tsv = _write_tsv(tmp_path / "r.tsv", ["a\tb\tc"])
    with pytest.raises(ColumnMapError):
        ingest_tsv(tsv, {"review_id": 0, "product_id": 1, "star_rating": 2, "review_body": 9})
    with pytest.raises(ColumnMapError):
        ingest_tsv(tsv, {"review_id": 0})


def test_ingest_custom_column_map(tmp_path):
    tsv = _write_tsv(tmp_path / "r.tsv", ["R1\tP1\t4\tgreat little lamp"])
    corpus = ingest_tsv(
        tsv, {"review_id": 0, "product_id": 1, "star_rating": 2, "review_body": 3}
    )
    assert corpus.total_reviews() == 1


def _product_with_counts(counts):
    reviews = [
        make_review(f"R{i}", "P1", 3, "", " ".join(["word"] * c))
        for i, c in enumerate(counts)
    ]
    return Product(product_id="P1", reviews=reviews)


def test_filter_reviews_window():
    product = _product_with_counts([10, 15, 500])
    kept = filter_reviews(product, 15, 400)
    assert [r.token_count for r in kept.reviews] == [15]


def test_filter_reviews_identity_and_degenerate():
    product = _product_with_counts([10, 20, 30])
    assert filter_reviews(product, 0, None).reviews == product.reviews
    assert filter_reviews(product, 100).reviews == []


def test_filter_reviews_idempotent():
    rng = random.Random(3)
    product = _product_with_counts([rng.randint(1, 60) for _ in range(40)])
    once = filter_reviews(product, 15, 40)
    twice = filter_reviews(once, 15, 40)
    assert [r.review_id for r in once.reviews] == [r.review_id for r in twice.reviews]


def _corpus_with_product_sizes(sizes, category="c"):
    products = []
    for i, size in enumerate(sizes):
        reviews = [
            make_review(f"P{i}-r{j}", f"P{i}", 3, "", "w w w") for j in range(size)
        ]
        products.append(Product(product_id=f"P{i}", category=category, reviews=reviews))
    return Corpus(products=products)


def test_corpus_stats_bucketing():
    stats = corpus_stats(_corpus_with_product_sizes([5, 50, 150]))
    by_label = {b.label: b for b in stats.buckets}
    assert by_label["1-9"].product_count == 1
    assert by_label["10-99"].product_count == 1
    assert by_label["100-999"].product_count == 1
    for label in ("1-9", "10-99", "100-999"):
        assert abs(by_label[label].product_ratio - 1 / 3) < 1e-12


def test_corpus_stats_top_bucket():
    stats = corpus_stats(_corpus_with_product_sizes([10000]))
    top = {b.label: b for b in stats.buckets}[">=10000"]
    assert top.product_count == 1 and top.product_ratio == 1.0


def test_corpus_stats_ratio_sums():
    rng = random.Random(11)
    for _ in range(20):
        sizes = [rng.randint(1, 40) for _ in range(rng.randint(1, 30))]
        stats = corpus_stats(_corpus_with_product_sizes(sizes))
        assert abs(sum(b.product_ratio for b in stats.buckets) - 1.0) < 1e-9
        assert abs(sum(b.review_ratio for b in stats.buckets) - 1.0) < 1e-9
        assert sum(b.product_count for b in stats.buckets) == len(sizes)


def test_corpus_stats_empty():
    stats = corpus_stats(Corpus())
    assert all(b.product_count == 0 and b.product_ratio == 0.0 for b in stats.buckets)


def test_corpus_stats_matches_drawn_bucket_proportions():
    # draw product sizes to match the 0.89 / 0.10 / 0.01 bucket proportions,
    # then verify they round-trip through the stats computation
    rng = random.Random(5)
    sizes = (
        [rng.randint(1, 9) for _ in range(890)]
        + [rng.randint(10, 99) for _ in range(100)]
        + [rng.randint(100, 300) for _ in range(10)]
    )
    rng.shuffle(sizes)
    stats = corpus_stats(_corpus_with_product_sizes(sizes))
    by_label = {b.label: b for b in stats.buckets}
    assert abs(by_label["1-9"].product_ratio - 0.89) < 0.01
    assert abs(by_label["10-99"].product_ratio - 0.10) < 0.01
    assert abs(by_label["100-999"].product_ratio - 0.01) < 0.01


def test_corpus_stats_category_medians():
    corpus = _corpus_with_product_sizes([2, 4, 6, 8])
    stats = corpus_stats(corpus)
    assert len(stats.categories) == 1
    # lower-middle median of [2, 4, 6, 8]
    assert stats.categories[0].reviews_median == 4


def _corpus_of(n):
    return _corpus_with_product_sizes([1] * n)


def test_split_exact_counts():
    train, valid, test = split_products(_corpus_of(2000), (1800, 100, 100), seed=1)
    assert (len(train), len(valid), len(test)) == (1800, 100, 100)


def test_split_deterministic():
    corpus = _corpus_of(50)
    first = split_products(corpus, (30, 10, 10), seed=9)
    second = split_products(corpus, (30, 10, 10), seed=9)
    for a, b in zip(first, second):
        assert [p.product_id for p in a.products] == [p.product_id for p in b.products]


def test_split_all_to_train():
    train, valid, test = split_products(_corpus_of(7), (1, 0, 0), seed=0)
    assert len(train) == 7 and len(valid) == 0 and len(test) == 0


def test_split_too_many_requested():
    with pytest.raises(ValueError):
        split_products(_corpus_of(5), (10, 2, 2), seed=0)


def test_split_partition_property():
    rng = random.Random(42)
    for _ in range(100):
        n = rng.randint(3, 40)
        corpus = _corpus_of(n)
        a = rng.random()
        b = rng.random() * (1 - a)
        train, valid, test = split_products(corpus, (a, b, 1 - a - b), seed=rng.randint(0, 999))
        ids = [p.product_id for part in (train, valid, test) for p in part.products]
        assert sorted(ids) == sorted(p.product_id for p in corpus.products)
        assert len(set(ids)) == len(ids)


def test_save_load_round_trip(tmp_path):
    corpus = _corpus_with_product_sizes([3, 2], category="Toys")
    save_corpus(corpus, tmp_path / "corpus")
    loaded = load_corpus(tmp_path / "corpus")
    assert [p.product_id for p in loaded.products] == [p.product_id for p in corpus.products]
    assert loaded.total_reviews() == corpus.total_reviews()
    assert loaded.products[0].category == "Toys"


def test_load_gzip_transparent(tmp_path):
    corpus = _corpus_with_product_sizes([2])
    plain = save_corpus(corpus, tmp_path / "corpus")
    gz = tmp_path / "corpus" / "reviews.jsonl.gz"
    with gzip.open(gz, "wt", encoding="utf-8") as handle:
        handle.write(plain.read_text(encoding="utf-8"))
    plain.unlink()
    loaded = load_corpus(tmp_path / "corpus")
    assert loaded.total_reviews() == 2
