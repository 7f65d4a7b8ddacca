"""Hierarchical summary generation over review clusters.

A cluster-summarization system (CSS) turns one cluster's texts into one
summary. Two bindings exist: a builtin extractive CSS (frequency-scored
greedy sentence selection) and an external process speaking newline-
delimited JSON over stdin/stdout ({"id", "texts"} in, {"id", "summary"}
out, one response per request, matched by id).

The `top` variant re-clusters summaries level by level until one remains;
the `level1` variant picks the level-1 summary with the highest average
ROUGE-1 F1 to its siblings. Either way the final text passes through a
stem-edit-distance dedup that drops near-duplicate sentences.
"""

from __future__ import annotations

import json
import logging
import queue
import shlex
import subprocess
import threading
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .clustering import Cluster, pivot_cluster
from .config import Config, derive_seed
from .corpus import Product, filter_reviews, make_review
from .rouge import SimFunction, avg_rouge1_f1
from .textproc import TokenizedText, tokenize, split_sentences

log = logging.getLogger(__name__)

__all__ = [
    "SummaryNode",
    "CssBinding",
    "CssError",
    "CssProtocolError",
    "ExternalCssClient",
    "builtin_css",
    "external_css",
    "generate_hierarchical",
    "dedup_sentences",
]

REDUNDANCY_PRECISION_MAX = 0.6


@dataclass
class SummaryNode:
    node_id: str
    level: int
    text: str
    source_cluster: str
    child_node_ids: list[str] = field(default_factory=list)


@dataclass
class CssBinding:
    kind: str = "builtin"  # builtin | external
    command: str = ""
    timeout: float = 30.0
    fallback: str = "fail"  # fail | builtin

    def __post_init__(self) -> None:
        if self.kind not in ("builtin", "external"):
            raise ValueError(f"unknown CSS kind: {self.kind}")
        if self.kind == "external" and not self.command.strip():
            raise ValueError("external CSS requires a command")
        if self.fallback not in ("fail", "builtin"):
            raise ValueError(f"unknown CSS fallback policy: {self.fallback}")


class CssError(RuntimeError):
    def __init__(self, message: str, partial: dict | None = None):
        super().__init__(message)
        self.partial = partial or {}


class CssProtocolError(CssError):
    pass


def _stem_precision(stems: Sequence[str], selected: set[str]) -> float:
    distinct = set(stems)
    if not distinct:
        return 0.0
    return len(distinct & selected) / len(distinct)


def builtin_css(cluster_texts: Sequence[TokenizedText], budget_tokens: int = 60) -> str:
    """Extractive summary: sentences scored by the mean cluster-wide relative
    frequency of their content stems, selected greedily with a redundancy
    skip, until the next sentence would exceed the token budget."""
    if budget_tokens < 10:
        raise ValueError("budget_tokens must be >= 10")
    freq: Counter = Counter()
    total = 0
    candidates = []  # (score, text_idx, sent_idx, tokens, stems)
    for ti, text in enumerate(cluster_texts):
        for si, (tokens, stems, flags) in enumerate(
            zip(text.sentences, text.stems, text.content_flags)
        ):
            content = [s for s, flag in zip(stems, flags) if flag]
            candidates.append((ti, si, tokens, stems, content))
            freq.update(content)
            total += len(content)
    if not candidates:
        raise ValueError("cluster contains no sentences")

    scored = []
    for ti, si, tokens, stems, content in candidates:
        if content and total:
            score = sum(freq[s] for s in content) / (len(content) * total)
        else:
            score = 0.0
        scored.append((-score, ti, si, tokens, stems))
    scored.sort(key=lambda item: item[:3])

    selected_stems: set[str] = set()
    picked: list[list[str]] = []
    token_count = 0
    for _, _, _, tokens, stems in scored:
        if picked and _stem_precision(stems, selected_stems) > REDUNDANCY_PRECISION_MAX:
            continue
        if picked and token_count + len(tokens) > budget_tokens:
            break
        picked.append(tokens)
        selected_stems.update(stems)
        token_count += len(tokens)
    return ". ".join(" ".join(tokens) for tokens in picked) + "."


class ExternalCssClient:
    """One external CSS process; requests may be pipelined and responses
    arrive in any order. A reader thread drains stdout so neither side can
    deadlock on a full pipe."""

    def __init__(self, binding: CssBinding):
        if binding.kind != "external":
            raise ValueError("binding is not external")
        self.binding = binding
        self._proc = subprocess.Popen(
            shlex.split(binding.command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
            encoding="utf-8",
        )
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._drain, daemon=True)
        self._reader.start()

    def _drain(self) -> None:
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def summarize_batch(self, requests: Sequence[tuple[str, list[str]]]) -> dict[str, str]:
        """Send all requests, then match responses by id.

        Raises CssProtocolError on malformed or unknown-id responses and
        CssError on process exit or timeout; partial results are attached
        to the exception.
        """
        pending = {req_id for req_id, _ in requests}
        if len(pending) != len(requests):
            raise ValueError("request ids must be unique")
        results: dict[str, str] = {}
        try:
            for req_id, texts in requests:
                self._proc.stdin.write(json.dumps({"id": req_id, "texts": texts}, ensure_ascii=False) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise CssError(f"CSS process not accepting requests: {exc}", results) from exc
        while pending:
            try:
                line = self._lines.get(timeout=self.binding.timeout)
            except queue.Empty:
                raise CssError(
                    f"CSS response timeout after {self.binding.timeout}s "
                    f"({len(pending)} pending)",
                    results,
                )
            if line is None:
                raise CssError(f"CSS process exited with {len(pending)} pending", results)
            try:
                response = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CssProtocolError(f"malformed CSS response line: {line!r}", results) from exc
            resp_id = response.get("id")
            if resp_id not in pending:
                raise CssProtocolError(f"unexpected CSS response id: {resp_id!r}", results)
            pending.discard(resp_id)
            if "error" in response or "summary" not in response:
                raise CssError(
                    f"CSS error for {resp_id}: {response.get('error', 'missing summary')}",
                    results,
                )
            results[resp_id] = response["summary"]
        return results

    def close(self) -> None:
        try:
            if self._proc.stdin:
                self._proc.stdin.close()
            self._proc.wait(timeout=2.0)
        except Exception:
            self._proc.kill()

    def __enter__(self) -> "ExternalCssClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def external_css(cluster_texts: Sequence[str], binding: CssBinding) -> str:
    """Summarize one cluster through the external protocol."""
    with ExternalCssClient(binding) as client:
        return client.summarize_batch([("r0", list(cluster_texts))])["r0"]


def _levenshtein(a: Sequence[str], b: Sequence[str]) -> int:
    if not a:
        return len(b)
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        curr = [i] + [0] * len(b)
        for j, y in enumerate(b, 1):
            curr[j] = min(prev[j] + 1, curr[j - 1] + 1, prev[j - 1] + (x != y))
        prev = curr
    return prev[-1]


def stem_edit_similarity(a: Sequence[str], b: Sequence[str]) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - _levenshtein(a, b) / longest


def dedup_sentences(summary: str, max_edit_dist: float) -> str:
    """Drop any sentence whose stem-sequence similarity to an earlier
    sentence reaches the threshold; survivors keep their order."""
    if not 0.0 <= max_edit_dist <= 1.0:
        raise ValueError("max_edit_dist must be in [0, 1]")
    raw = split_sentences(summary)
    stems = tokenize(summary).stems
    keep: list[int] = []
    for j in range(len(raw)):
        if any(
            stem_edit_similarity(stems[i], stems[j]) >= max_edit_dist for i in range(j)
        ):
            continue
        keep.append(j)
    return " ".join(raw[j] for j in keep)


def _summarize_clusters(
    clusters: Sequence[Cluster],
    bodies: dict[str, str],
    css: CssBinding,
    config: Config,
    client: ExternalCssClient | None,
) -> dict[str, str]:
    """One summary per cluster id, honoring the CSS binding and fallback."""
    texts = {c.cluster_id: [bodies[rid] for rid in c.member_ids] for c in clusters}
    if css.kind == "builtin":
        return {
            cid: builtin_css([tokenize(t) for t in cluster], config.css_budget_tokens)
            for cid, cluster in texts.items()
        }
    requests = [(cid, texts[cid]) for cid in sorted(texts)]
    try:
        results = client.summarize_batch(requests)
    except CssError as exc:
        if css.fallback != "builtin":
            raise
        log.warning("external CSS failed (%s); falling back to builtin", exc)
        results = dict(exc.partial)
    missing = [cid for cid in texts if not results.get(cid)]
    for cid in missing:
        if css.fallback != "builtin":
            raise CssError(f"external CSS returned no summary for {cid}")
        results[cid] = builtin_css([tokenize(t) for t in texts[cid]], config.css_budget_tokens)
    return results


def generate_hierarchical(
    product: Product,
    config: Config,
    sim: SimFunction,
    css: CssBinding,
    variant: str = "level1",
    seed: int | None = None,
) -> tuple[str, list[SummaryNode]]:
    """Cluster, summarize, and reduce to one final summary.

    variant="top" recursively clusters the summaries until one remains;
    variant="level1" picks the level-1 summary with the highest average
    ROUGE-1 F1 against the others (ties to the smallest node_id).
    """
    if variant not in ("top", "level1"):
        raise ValueError(f"unknown variant: {variant}")
    base_seed = config.seed if seed is None else seed
    filtered = filter_reviews(product, config.min_tokens)
    if not filtered.reviews:
        raise ValueError(f"product {product.product_id} empty after filtering")

    client = ExternalCssClient(css) if css.kind == "external" else None
    tree: list[SummaryNode] = []
    try:
        clusters = pivot_cluster(filtered, config, derive_seed(base_seed, product.product_id, 1))
        bodies = {r.review_id: r.body for r in filtered.reviews}
        summaries = _summarize_clusters(clusters, bodies, css, config, client)
        nodes = [
            SummaryNode(
                node_id=f"{product.product_id}-L1-n{i:04d}",
                level=1,
                text=summaries[c.cluster_id],
                source_cluster=c.cluster_id,
            )
            for i, c in enumerate(clusters)
        ]
        tree.extend(nodes)
        level1_nodes = list(nodes)

        if variant == "top":
            level = 1
            while len(nodes) > 1:
                level += 1
                pseudo = Product(
                    product_id=product.product_id,
                    reviews=[
                        make_review(n.node_id, product.product_id, 3, "", n.text) for n in nodes
                    ],
                )
                clusters = pivot_cluster(
                    pseudo, config, derive_seed(base_seed, product.product_id, level)
                )
                node_bodies = {n.node_id: n.text for n in nodes}
                summaries = _summarize_clusters(clusters, node_bodies, css, config, client)
                nodes = [
                    SummaryNode(
                        node_id=f"{product.product_id}-L{level}-n{i:04d}",
                        level=level,
                        text=summaries[c.cluster_id],
                        source_cluster=c.cluster_id,
                        child_node_ids=list(c.member_ids),
                    )
                    for i, c in enumerate(clusters)
                ]
                tree.extend(nodes)
            final_node = nodes[0]
        else:
            final_node = _level1_medoid(level1_nodes)
    finally:
        if client is not None:
            client.close()

    return dedup_sentences(final_node.text, config.max_edit_dist), tree


def _level1_medoid(nodes: Sequence[SummaryNode]) -> SummaryNode:
    if len(nodes) == 1:
        return nodes[0]
    tokenized = {n.node_id: tokenize(n.text) for n in nodes}
    best, best_score = None, -1.0
    for node in sorted(nodes, key=lambda n: n.node_id):
        pool = [tokenized[o.node_id] for o in nodes if o.node_id != node.node_id]
        score = avg_rouge1_f1(tokenized[node.node_id], pool)
        if score > best_score:
            best, best_score = node, score
    return best
