"""Shared synthetic-review generators for the test suite.

Reviews are built from themed phrase templates so that reviews of the same
product are genuinely similar (clusterable, summarizable) while products
stay distinct. Everything is driven by an explicit random.Random so tests
are reproducible.
"""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from reviewsum.corpus import Corpus, Product, make_review

DATA_DIR = Path(__file__).parent / "data"
PLUGIN_DIR = Path(__file__).parent / "plugins"

ASPECTS = [
    "battery", "screen", "sound", "price", "quality", "camera", "design",
    "shipping", "setup", "manual", "case", "button", "cable", "charger",
    "warranty", "color", "size", "weight", "speed", "memory", "keyboard",
    "stand", "strap", "lens", "zoom", "remote", "adapter", "antenna",
]
ADJECTIVES = [
    "great", "terrible", "decent", "amazing", "poor", "solid", "flimsy",
    "bright", "loud", "cheap", "expensive", "fast", "slow", "reliable",
    "sturdy", "beautiful", "awful", "fine", "crisp", "quiet", "heavy",
    "light", "smooth", "rough", "perfect",
]
VERBS = [
    "love", "hate", "like", "recommend", "returned", "use", "bought",
    "tried", "enjoy", "regret", "ordered", "upgraded",
]
NOUNS = [
    "product", "item", "device", "gadget", "unit", "thing", "purchase",
    "gift", "replacement", "model", "speaker", "player",
]

_TEMPLATES = [
    "the {aspect} is {adj}",
    "i {verb} this {noun} every day",
    "the {aspect} feels {adj} after a few weeks",
    "{adj} {aspect} and really {adj} {aspect2}",
    "my brother {verb} the {aspect} right away",
    "it works {adj} for the {aspect}",
    "overall a {adj} {noun} with a {adj} {aspect}",
    "would not trade the {aspect} for anything",
    "the {noun} arrived quickly and the {aspect} is {adj}",
    "customer service was {adj} about the {aspect}",
]


def make_sentence(rng: random.Random, aspects=ASPECTS, adjectives=ADJECTIVES) -> str:
    template = rng.choice(_TEMPLATES)
    return template.format(
        aspect=rng.choice(aspects),
        aspect2=rng.choice(aspects),
        adj=rng.choice(adjectives),
        noun=rng.choice(NOUNS),
        verb=rng.choice(VERBS),
    ) + "."


def make_review_text(
    rng: random.Random,
    n_sentences: int | None = None,
    aspects=ASPECTS,
    adjectives=ADJECTIVES,
) -> str:
    n = n_sentences if n_sentences is not None else rng.randint(3, 6)
    return " ".join(make_sentence(rng, aspects, adjectives) for _ in range(n))


def make_synth_product(
    product_id: str,
    n_reviews: int,
    rng: random.Random,
    n_sentences: int | None = None,
    theme_size: int = 8,
    category: str = "Electronics",
) -> Product:
    """A product whose reviews share a sampled aspect/adjective theme."""
    aspects = rng.sample(ASPECTS, theme_size)
    adjectives = rng.sample(ADJECTIVES, theme_size)
    reviews = [
        make_review(
            review_id=f"{product_id}-r{i:05d}",
            product_id=product_id,
            star_rating=rng.randint(1, 5),
            title="",
            body=make_review_text(rng, n_sentences, aspects, adjectives),
        )
        for i in range(n_reviews)
    ]
    return Product(product_id=product_id, category=category, title=f"{product_id} item", reviews=reviews)


def make_synth_corpus(
    n_products: int,
    reviews_per_product,
    seed: int,
    n_sentences: int | None = None,
) -> Corpus:
    rng = random.Random(seed)
    products = []
    for i in range(n_products):
        if callable(reviews_per_product):
            count = reviews_per_product(rng)
        else:
            count = reviews_per_product
        products.append(
            make_synth_product(f"P{i:04d}", count, random.Random(rng.random()), n_sentences)
        )
    return Corpus(products=products)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240901)


@pytest.fixture
def small_product(rng) -> Product:
    return make_synth_product("PSMALL", 12, rng, n_sentences=4)
