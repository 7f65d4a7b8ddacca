import math
import random
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PLUGIN_DIR, make_review_text, make_synth_product
from reviewsum.config import Config
from reviewsum.corpus import Product, make_review
from reviewsum.rouge import SimFunction, rouge_n
from reviewsum.summarize import (
    CssBinding,
    CssError,
    CssProtocolError,
    ExternalCssClient,
    builtin_css,
    dedup_sentences,
    external_css,
    generate_hierarchical,
    stem_edit_similarity,
)
from reviewsum.textproc import tokenize


def _plugin(name, *args, **binding_kwargs):
    command = f"{sys.executable} {PLUGIN_DIR / name}"
    if args:
        command += " " + " ".join(str(a) for a in args)
    return CssBinding(kind="external", command=command, **binding_kwargs)


# --- builtin CSS -------------------------------------------------------------


def test_builtin_redundancy_skip_on_identical_reviews():
    texts = [tokenize("the sound is great.")] * 3
    assert builtin_css(texts) == "the sound is great."


def test_builtin_single_sentence_verbatim():
    assert builtin_css([tokenize("Crisp photos in low light!")]) == "crisp photos in low light."


def test_builtin_prefers_cluster_wide_stems():
    # "battery" appears in all three reviews, "strap" in one
    texts = [
        tokenize("battery lasts forever. strap feels cheap."),
        tokenize("battery charges fast."),
        tokenize("battery works great."),
    ]
    summary = builtin_css(texts, budget_tokens=10)
    assert summary.split(".")[0].strip().startswith("battery")


def test_builtin_budget_stops_before_overflow():
    filler = [f"padding words number {i} extend this sentence plenty." for i in range(10)]
    texts = [tokenize(" ".join(filler))]
    summary = builtin_css(texts, budget_tokens=20)
    assert len(tokenize(summary).sentences) >= 1
    assert tokenize(summary).num_tokens <= 20


def test_builtin_oversized_first_sentence_still_emitted():
    long_sentence = " ".join(f"w{i}" for i in range(40)) + "."
    summary = builtin_css([tokenize(long_sentence)], budget_tokens=10)
    assert tokenize(summary).num_tokens == 40


def test_builtin_rejects_empty():
    with pytest.raises(ValueError):
        builtin_css([tokenize("")])
    with pytest.raises(ValueError):
        builtin_css([tokenize("a b")], budget_tokens=5)


def test_builtin_output_sentences_are_extracted(rng):
    for _ in range(20):
        texts = [tokenize(make_review_text(rng)) for _ in range(4)]
        budget = rng.randint(10, 60)
        summary = tokenize(builtin_css(texts, budget_tokens=budget))
        source = {tuple(s) for t in texts for s in t.sentences}
        assert all(tuple(s) in source for s in summary.sentences)
        longest = max(len(s) for t in texts for s in t.sentences)
        assert summary.num_tokens <= budget + longest


# --- external CSS ------------------------------------------------------------


def test_external_echo_round_trip():
    out = external_css(["hello world.", "second text."], _plugin("echo_plugin.py"))
    assert out == "hello world."


def test_external_out_of_order_batch():
    binding = _plugin("reorder_plugin.py", 100)
    with ExternalCssClient(binding) as client:
        requests = [(f"c{i:03d}", [f"text number {i}."]) for i in range(100)]
        results = client.summarize_batch(requests)
    assert len(results) == 100
    assert all(results[f"c{i:03d}"] == f"text number {i}." for i in range(100))


def test_external_id_mismatch_is_protocol_error():
    with pytest.raises(CssProtocolError):
        external_css(["whatever."], _plugin("badid_plugin.py"))


def test_external_timeout():
    with pytest.raises(CssError, match="timeout"):
        external_css(["never answered."], _plugin("silent_plugin.py", timeout=0.4))


def test_external_dead_process():
    binding = CssBinding(kind="external", command=f"{sys.executable} -c pass", timeout=5.0)
    with pytest.raises(CssError):
        external_css(["text."], binding)


# --- dedup -------------------------------------------------------------------


def test_dedup_drops_identical_sentence():
    assert dedup_sentences("great price. great price.", 0.7) == "great price."


def test_dedup_boundary_inclusive():
    first = "a1 b2 c3 d4 e5 f6 g7 h8 i9 j10."
    second = "a1 b2 c3 d4 e5 f6 g7 x1 y2 z3."
    stems_a = tokenize(first).stems[0]
    stems_b = tokenize(second).stems[0]
    assert math.isclose(stem_edit_similarity(stems_a, stems_b), 0.7)
    assert dedup_sentences(f"{first} {second}", 0.7) == first


def test_dedup_keeps_disjoint():
    text = "sturdy metal frame. totally unrelated words here."
    assert dedup_sentences(text, 0.7) == text


def test_dedup_preserves_order_and_is_idempotent(rng):
    sentences = [make_review_text(rng, 1) for _ in range(6)]
    text = " ".join(sentences * 2)
    once = dedup_sentences(text, 0.7)
    assert dedup_sentences(once, 0.7) == once
    kept = tokenize(once).sentences
    original = tokenize(text).sentences
    positions = [original.index(s) for s in kept]
    assert positions == sorted(positions)


@given(st.lists(st.sampled_from("abcdefgh"), min_size=1, max_size=8), st.integers(0, 100))
@settings(max_examples=40)
def test_dedup_idempotent_random(letters, seed):
    rng = random.Random(seed)
    sentences = [
        " ".join(rng.choice("xyzuvw") + letter for letter in letters) + "."
        for _ in range(rng.randint(1, 5))
    ]
    text = " ".join(sentences)
    once = dedup_sentences(text, 0.7)
    assert dedup_sentences(once, 0.7) == once


# --- hierarchical generation -------------------------------------------------


def _big_product(n_reviews, seed, n_sentences=25):
    rng = random.Random(seed)
    reviews = [
        make_review(
            f"PB-r{i:03d}",
            "PB",
            3,
            "",
            " ".join(make_review_text(rng, 1) for _ in range(n_sentences)),
        )
        for i in range(n_reviews)
    ]
    return Product(product_id="PB", reviews=reviews)


def test_single_cluster_top_equals_level1():
    product = make_synth_product("P1C", 3, random.Random(5), n_sentences=4)
    config = Config(seed=3)
    css = CssBinding()
    top, _ = generate_hierarchical(product, config, SimFunction.AVG_ROUGE1_F1, css, "top")
    level1, tree = generate_hierarchical(product, config, SimFunction.AVG_ROUGE1_F1, css, "level1")
    assert top == level1
    assert len(tree) == 1


def test_level1_matches_brute_force():
    product = _big_product(9, seed=11)
    config = Config(seed=21)
    final, tree = generate_hierarchical(
        product, config, SimFunction.AVG_ROUGE1_F1, CssBinding(), "level1"
    )
    level1 = [n for n in tree if n.level == 1]
    assert len(level1) >= 3
    # brute-force argmax of mean ROUGE-1 F1 to the other summaries
    best_id, best_score = None, -1.0
    for node in level1:
        others = [o for o in level1 if o.node_id != node.node_id]
        score = sum(
            rouge_n(tokenize(o.text), tokenize(node.text), 1).f1 for o in others
        ) / len(others)
        if score > best_score or (score == best_score and node.node_id < best_id):
            best_id, best_score = node.node_id, score
    chosen = next(n for n in level1 if n.node_id == best_id)
    from reviewsum.summarize import dedup_sentences as dedup

    assert final == dedup(chosen.text, config.max_edit_dist)


def test_top_terminates_with_decreasing_levels():
    product = _big_product(14, seed=13)
    config = Config(seed=5)
    final, tree = generate_hierarchical(
        product, config, SimFunction.AVG_ROUGE1_F1, CssBinding(), "top"
    )
    assert final
    levels = sorted({n.level for n in tree})
    counts = [sum(1 for n in tree if n.level == lvl) for lvl in levels]
    assert counts[-1] == 1
    assert all(a > b for a, b in zip(counts, counts[1:]))
    for node in tree:
        if node.level > 1:
            assert node.child_node_ids


def test_generate_with_external_echo_plugin():
    product = make_synth_product("PEXT", 8, random.Random(2), n_sentences=4)
    config = Config(seed=9)
    final, tree = generate_hierarchical(
        product, config, SimFunction.AVG_ROUGE1_F1, _plugin("echo_plugin.py"), "level1"
    )
    assert final
    bodies = {r.body for r in product.reviews}
    for node in tree:
        assert node.text in bodies  # echo returns the first member verbatim


def test_generate_fallback_to_builtin():
    product = make_synth_product("PFB", 6, random.Random(4), n_sentences=4)
    config = Config(seed=1)
    binding = _plugin("silent_plugin.py", timeout=0.4, fallback="builtin")
    final, tree = generate_hierarchical(
        product, config, SimFunction.AVG_ROUGE1_F1, binding, "level1"
    )
    assert final and all(node.text for node in tree)


def test_generate_rejects_empty_product():
    product = Product(product_id="PV", reviews=[make_review("r", "PV", 3, "", "too short.")])
    with pytest.raises(ValueError):
        generate_hierarchical(product, Config(), SimFunction.AVG_ROUGE1_F1, CssBinding(), "top")


def test_generate_rejects_unknown_variant(small_product):
    with pytest.raises(ValueError):
        generate_hierarchical(
            small_product, Config(), SimFunction.AVG_ROUGE1_F1, CssBinding(), "middle"
        )
