#!/usr/bin/env python3
"""Regenerate the bundled 5-product fixture used by the integration tests.

Writes tests/data/fixture_reviews.tsv (Amazon dump column order) and
tests/data/fixture_refs.jsonl (one reference per annotation set, derived
deterministically from the set's reviews). The fixture is committed; rerun
only when the generators change, then refresh the golden outputs.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from conftest import ADJECTIVES, ASPECTS, make_review_text  # noqa: E402

from reviewsum.config import Config, derive_seed  # noqa: E402
from reviewsum.corpus import ingest_tsv, filter_reviews  # noqa: E402
from reviewsum.evaluation import make_annotation_sets  # noqa: E402
from reviewsum.textproc import split_sentences, whitespace_token_count  # noqa: E402

SEED = 7
DATA_DIR = ROOT / "tests" / "data"

PRODUCTS = [
    ("B000FIXT01", "Electronics", "Compact bluetooth speaker", 44),
    ("B000FIXT02", "Electronics", "Wireless earbuds", 38),
    ("B000FIXT03", "Camera", "Ultra wide zoom lens", 52),
    ("B000FIXT04", "Toys", "Wooden block set", 31),
    ("B000FIXT05", "Books", "Slow cooker recipe book", 35),
]


def build_tsv(path: Path) -> None:
    rng = random.Random(SEED)
    rows = []
    serial = 0
    for product_id, category, title, n_reviews in PRODUCTS:
        aspects = rng.sample(ASPECTS, 9)
        adjectives = rng.sample(ADJECTIVES, 9)
        for _ in range(n_reviews):
            serial += 1
            body = make_review_text(rng, rng.randint(3, 7), aspects, adjectives)
            cols = [""] * 15
            cols[0] = "US"
            cols[1] = f"C{serial:06d}"
            cols[2] = f"R{serial:06d}"
            cols[3] = product_id
            cols[4] = "0"
            cols[5] = title
            cols[6] = category
            cols[7] = str(rng.randint(1, 5))
            cols[8] = "0"
            cols[9] = "0"
            cols[10] = "N"
            cols[11] = "Y"
            cols[12] = "review headline"
            cols[13] = body
            cols[14] = "2015-08-31"
            rows.append("\t".join(cols))
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def build_refs(tsv_path: Path, out_path: Path) -> None:
    config = Config(seed=SEED)
    corpus = ingest_tsv(tsv_path)
    records = []
    for product in corpus.products:
        filtered = filter_reviews(product, config.min_tokens)
        sets = make_annotation_sets(
            filtered, config, derive_seed(SEED, product.product_id, "annotation")
        )
        by_id = {r.review_id: r for r in filtered.reviews}
        for annotation in sets:
            sentences = []
            for rid in annotation.review_ids[:4]:
                first = split_sentences(by_id[rid].body)[0]
                sentences.append(first)
            text = " ".join(sentences)
            while whitespace_token_count(text) < config.ref_min_tokens:
                text += " overall owners call it a fair deal."
            records.append(
                {"set_id": annotation.set_id, "product_id": product.product_id, "text": text}
            )
    with out_path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    tsv = DATA_DIR / "fixture_reviews.tsv"
    build_tsv(tsv)
    build_refs(tsv, DATA_DIR / "fixture_refs.jsonl")
    print(f"wrote {tsv}")
    print(f"wrote {DATA_DIR / 'fixture_refs.jsonl'}")


if __name__ == "__main__":
    main()
