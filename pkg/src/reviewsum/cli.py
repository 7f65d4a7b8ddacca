"""Command-line entry point.

Every subcommand is deterministic given its flags and seed; runs that write
files also emit a manifest JSON (config snapshot, seed, paths, tool and
stemmer/stopword versions, timestamps) alongside the primary output.

Exit codes: 0 success, 1 runtime failure (one-line JSON error on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .analysis import sample_correlation_curve, emit_curves
from .baselines import BaselineKind, run_baseline
from .clustering import extract_weak_reference, pivot_cluster, write_training_pairs
from .config import Config, derive_seed, make_config
from .corpus import Corpus, corpus_stats, filter_reviews, ingest_tsv, load_corpus, save_corpus
from .evaluation import (
    ReferenceSummary,
    evaluate_system,
    make_annotation_sets,
    render_report,
    report_to_dict,
    validate_reference,
)
from .rouge import METRICS, SimFunction, rouge_multi
from .summarize import CssBinding, generate_hierarchical
from .textproc import PORTER_VERSION, STOPWORDS_VERSION, tokenize

log = logging.getLogger("reviewsum")

VERSION_STRING = (
    f"reviewsum {__version__} (stemmer {PORTER_VERSION}, stopwords {STOPWORDS_VERSION})"
)

_CONFIG_FLAGS = (
    "min_rev",
    "max_len",
    "max_edit_dist",
    "lead_limit",
    "min_tokens",
    "max_tokens_baseline",
    "novel_precision_min",
    "ref_min_tokens",
    "annotation_max_sentences",
    "css_budget_tokens",
)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--seed", type=int, default=None)
    for name in _CONFIG_FLAGS:
        kind = float if name in ("max_edit_dist", "novel_precision_min") else int
        parser.add_argument(f"--{name.replace('_', '-')}", type=kind, default=None, dest=name)


def _build_config(args: argparse.Namespace) -> Config:
    overrides = {name: getattr(args, name, None) for name in _CONFIG_FLAGS}
    overrides["seed"] = getattr(args, "seed", None)
    return make_config(getattr(args, "config", None), **overrides)


def _write_manifest(args, config: Config, out: Path, started: float, extra: dict | None = None):
    manifest = {
        "subcommand": args.command,
        "tool_version": __version__,
        "stemmer_version": PORTER_VERSION,
        "stopwords_version": STOPWORDS_VERSION,
        "seed": config.seed,
        "config": config.to_dict(),
        "inputs": {
            key: str(getattr(args, key))
            for key in ("input", "corpus", "system", "refs", "sets", "candidate", "references")
            if getattr(args, key, None)
        },
        "output": str(out),
        "started": started,
        "ended": time.time(),
    }
    if extra:
        manifest.update(extra)
    path = out / "manifest.json" if out.is_dir() else Path(str(out) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _parse_columns(spec: str | None) -> dict[str, int] | None:
    if not spec:
        return None
    columns = {}
    for part in spec.split(","):
        name, _, index = part.partition("=")
        if not index:
            raise ValueError(f"bad --columns entry: {part!r} (want field=index)")
        columns[name.strip()] = int(index)
    return columns


def _parse_sizes(spec: str) -> list[int]:
    if ":" in spec:
        parts = [int(p) for p in spec.split(":")]
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        return list(range(start, stop + 1, step))
    return [int(p) for p in spec.split(",")]


def _jsonl_lines(path: str | Path):
    with Path(path).open("r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                yield json.loads(line)


def _cmd_ingest(args) -> int:
    config = _build_config(args)
    started = time.time()
    corpus = ingest_tsv(args.input, _parse_columns(args.columns))
    out = Path(args.out)
    save_corpus(corpus, out)
    _write_manifest(args, config, out, started, {"skipped_rows": corpus.skipped_rows})
    log.info(
        "ingested %d products / %d reviews (%d rows skipped)",
        len(corpus),
        corpus.total_reviews(),
        corpus.skipped_rows,
    )
    return 0


def _render_stats(corpus: Corpus, by_category: bool) -> str:
    stats = corpus_stats(corpus)
    lines = ["size_of_review_set\tproduct_count\tproduct_ratio\treview_count\treview_ratio"]
    for b in stats.buckets:
        lines.append(
            f"{b.label}\t{b.product_count}\t{b.product_ratio:.4f}"
            f"\t{b.review_count}\t{b.review_ratio:.4f}"
        )
    if by_category:
        lines.append("")
        lines.append(
            "category\tnum_products\treviews_max\treviews_avg\treviews_med"
            "\twords_max\twords_avg\twords_med"
        )
        for c in stats.categories:
            lines.append(
                f"{c.category}\t{c.num_products}\t{c.reviews_max}\t{c.reviews_avg:.1f}"
                f"\t{c.reviews_median}\t{c.words_max}\t{c.words_avg:.1f}\t{c.words_median}"
            )
    return "\n".join(lines) + "\n"


def _cmd_stats(args) -> int:
    table = _render_stats(load_corpus(args.corpus), args.by_category)
    if args.out:
        started = time.time()
        Path(args.out).write_text(table, encoding="utf-8")
        _write_manifest(args, _build_config(args), Path(args.out), started)
    else:
        sys.stdout.write(table)
    return 0


def _cmd_cluster(args) -> int:
    config = _build_config(args)
    started = time.time()
    sim = SimFunction(args.sim)
    corpus = load_corpus(args.corpus)
    out = Path(args.out)
    with out.open("w", encoding="utf-8") as handle:
        for product in corpus.products:
            filtered = filter_reviews(product, config.min_tokens)
            if not filtered.reviews:
                log.warning("product %s empty after filtering; skipped", product.product_id)
                continue
            for cluster in pivot_cluster(
                filtered, config, derive_seed(config.seed, product.product_id)
            ):
                if len(cluster.member_ids) >= 2:
                    weak_id, score = extract_weak_reference(cluster, filtered, sim)
                else:
                    weak_id, score = cluster.member_ids[0], None
                handle.write(
                    json.dumps(
                        {
                            "cluster_id": cluster.cluster_id,
                            "product_id": cluster.product_id,
                            "pivot_id": cluster.pivot_id,
                            "member_ids": cluster.member_ids,
                            "total_sentences": cluster.total_sentences,
                            "degenerate": cluster.degenerate,
                            "weak_reference_id": weak_id,
                            "sim_score": score,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )
    _write_manifest(args, config, out, started)
    return 0


def _cmd_export_training(args) -> int:
    config = _build_config(args)
    started = time.time()
    corpus = load_corpus(args.corpus)
    count = write_training_pairs(corpus, config, SimFunction(args.sim), args.out)
    _write_manifest(args, config, Path(args.out), started, {"pairs": count})
    log.info("wrote %d training pairs", count)
    return 0


def _cmd_summarize(args) -> int:
    config = _build_config(args)
    started = time.time()
    sim = SimFunction(args.sim)
    if args.css == "builtin":
        binding = CssBinding(kind="builtin")
    elif args.css.startswith("exec:"):
        binding = CssBinding(
            kind="external",
            command=args.css[5:],
            timeout=args.css_timeout,
            fallback=args.css_fallback,
        )
    else:
        raise ValueError(f"--css must be 'builtin' or 'exec:<command>', got {args.css!r}")
    corpus = load_corpus(args.corpus)
    out = Path(args.out)
    with out.open("w", encoding="utf-8") as handle:
        for product in corpus.products:
            try:
                final, tree = generate_hierarchical(
                    product, config, sim, binding, variant=args.variant, seed=config.seed
                )
            except ValueError as exc:
                log.warning("skipping product %s: %s", product.product_id, exc)
                continue
            levels = max(node.level for node in tree)
            handle.write(
                json.dumps(
                    {
                        "product_id": product.product_id,
                        "variant": args.variant,
                        "summary": final,
                        "levels": levels,
                        "level1_count": sum(1 for n in tree if n.level == 1),
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    _write_manifest(args, config, out, started)
    return 0


def _cmd_baseline(args) -> int:
    config = _build_config(args)
    started = time.time()
    kind = BaselineKind(args.kind)
    corpus = load_corpus(args.corpus)
    out = Path(args.out)
    with out.open("w", encoding="utf-8") as handle:
        for product in corpus.products:
            try:
                summary = run_baseline(
                    kind, product, config, derive_seed(config.seed, product.product_id, kind.value)
                )
            except ValueError as exc:
                log.warning("skipping product %s: %s", product.product_id, exc)
                continue
            handle.write(
                json.dumps(
                    {"product_id": product.product_id, "kind": kind.value, "summary": summary},
                    ensure_ascii=False,
                )
                + "\n"
            )
    _write_manifest(args, config, out, started)
    return 0


def _cmd_make_annotation_sets(args) -> int:
    config = _build_config(args)
    started = time.time()
    corpus = load_corpus(args.corpus)
    out = Path(args.out)
    with out.open("w", encoding="utf-8") as handle:
        for product in corpus.products:
            filtered = filter_reviews(product, config.min_tokens)
            if len(filtered.reviews) < 2:
                log.warning("product %s has < 2 eligible reviews; skipped", product.product_id)
                continue
            sets = make_annotation_sets(
                filtered, config, derive_seed(config.seed, product.product_id, "annotation")
            )
            for annotation_set in sets:
                handle.write(json.dumps(asdict(annotation_set), ensure_ascii=False) + "\n")
    _write_manifest(args, config, out, started)
    return 0


def _cmd_validate_refs(args) -> int:
    config = _build_config(args)
    corpus = load_corpus(args.corpus)
    from .evaluation import AnnotationSet

    sets = {
        rec["set_id"]: AnnotationSet(**rec) for rec in _jsonl_lines(args.sets)
    }
    lines = []
    unknown = 0
    for rec in _jsonl_lines(args.refs):
        ref = ReferenceSummary(
            set_id=rec["set_id"], product_id=rec.get("product_id", ""), text=rec["text"]
        )
        if ref.set_id not in sets:
            unknown += 1
            continue
        violations = validate_reference(ref, sets[ref.set_id], corpus, config)
        lines.append(json.dumps({"set_id": ref.set_id, "violations": violations}))
    if unknown:
        log.warning("%d references with unknown set_id skipped", unknown)
    body = "\n".join(lines) + ("\n" if lines else "")
    if args.out:
        started = time.time()
        Path(args.out).write_text(body, encoding="utf-8")
        _write_manifest(args, config, Path(args.out), started)
    else:
        sys.stdout.write(body)
    return 0


def _cmd_evaluate(args) -> int:
    config = _build_config(args)
    started = time.time()
    summaries = {rec["product_id"]: rec["summary"] for rec in _jsonl_lines(args.system)}
    references: dict[str, list[ReferenceSummary]] = {}
    for rec in _jsonl_lines(args.refs):
        ref = ReferenceSummary(
            set_id=rec["set_id"], product_id=rec["product_id"], text=rec["text"]
        )
        references.setdefault(ref.product_id, []).append(ref)
    report = evaluate_system(
        summaries, references, bootstrap_iters=args.bootstrap, seed=config.seed, config=config
    )
    out = Path(args.out)
    out.write_text(render_report([(args.name, report)], aggregate=args.aggregate), encoding="utf-8")
    out.with_suffix(".json").write_text(
        json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    _write_manifest(args, config, out, started)
    return 0


def _cmd_analyze_samples(args) -> int:
    config = _build_config(args)
    started = time.time()
    corpus = load_corpus(args.corpus)
    points = sample_correlation_curve(
        corpus.products,
        sizes=_parse_sizes(args.sizes),
        samples_per_size=args.per_size,
        seed=config.seed,
    )
    emit_curves(points, args.out)
    _write_manifest(args, config, Path(args.out), started)
    return 0


def _cmd_score(args) -> int:
    candidate = tokenize(Path(args.candidate).read_text(encoding="utf-8"))
    ref_dir = Path(args.references)
    if ref_dir.is_dir():
        ref_paths = sorted(ref_dir.glob("*.txt"))
    else:
        ref_paths = [ref_dir]
    if not ref_paths:
        raise ValueError(f"no reference .txt files in {ref_dir}")
    references = [tokenize(p.read_text(encoding="utf-8")) for p in ref_paths]
    lines = ["metric\taggregate\tprecision\trecall\tf1"]
    for metric in METRICS:
        for aggregate in ("avg", "max"):
            score = rouge_multi(candidate, references, metric, aggregate)
            lines.append(
                f"{metric}\t{aggregate}\t{score.precision:.6f}"
                f"\t{score.recall:.6f}\t{score.f1:.6f}"
            )
    body = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(body, encoding="utf-8")
    else:
        sys.stdout.write(body)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reviewsum",
        description="Summarize and evaluate massive product-review sets.",
    )
    parser.add_argument("--version", action="version", version=VERSION_STRING)
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="TSV reviews -> normalized corpus dir")
    p.add_argument("--input", required=True)
    p.add_argument("--columns", help="field=index,... (default: Amazon dump order)")
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("stats", help="corpus statistics tables")
    p.add_argument("--corpus", required=True)
    p.add_argument("--by-category", action="store_true")
    p.add_argument("--out")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("cluster", help="pivot-cluster each product's reviews")
    p.add_argument("--corpus", required=True)
    p.add_argument("--sim", choices=["recall", "f1"], default="f1")
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("export-training", help="weak-supervision training pairs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--sim", choices=["recall", "f1"], default="f1")
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_export_training)

    p = sub.add_parser("summarize", help="hierarchical product summaries")
    p.add_argument("--corpus", required=True)
    p.add_argument("--variant", choices=["top", "level1"], default="level1")
    p.add_argument("--sim", choices=["recall", "f1"], default="f1")
    p.add_argument("--css", default="builtin", help="builtin or exec:<command>")
    p.add_argument("--css-timeout", type=float, default=30.0)
    p.add_argument("--css-fallback", choices=["fail", "builtin"], default="fail")
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_summarize)

    p = sub.add_parser("baseline", help="reference systems")
    p.add_argument("--kind", choices=[k.value for k in BaselineKind], required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("make-annotation-sets", help="random reference subsets")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_make_annotation_sets)

    p = sub.add_parser("validate-refs", help="check reference summaries")
    p.add_argument("--refs", required=True)
    p.add_argument("--sets", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_validate_refs)

    p = sub.add_parser("evaluate", help="multi-reference ROUGE with intervals")
    p.add_argument("--system", required=True, help="JSONL with product_id + summary")
    p.add_argument("--refs", required=True, help="JSONL with set_id/product_id/text")
    p.add_argument("--bootstrap", type=int, default=1000)
    p.add_argument("--name", default="system")
    p.add_argument("--aggregate", choices=["avg", "max"], default="avg")
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("analyze-samples", help="sample-vs-full n-gram curves")
    p.add_argument("--corpus", required=True)
    p.add_argument("--sizes", default="1:100", help="a:b[:step] or comma list")
    p.add_argument("--per-size", type=int, default=30)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_analyze_samples)

    p = sub.add_parser("score", help="ROUGE for a candidate file vs reference dir")
    p.add_argument("--candidate", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--out")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_score)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except Exception as exc:  # runtime failure -> exit 1, machine-parseable
        sys.stderr.write(
            json.dumps({"error": str(exc), "type": type(exc).__name__}) + "\n"
        )
        return 1


def main() -> None:
    sys.exit(run())
