#!/usr/bin/env python3
"""Reference cluster-summarization plugin.

Speaks the host's wire protocol: newline-delimited JSON on stdin/stdout,
request {"id": str, "texts": [str, ...]} in, response {"id": str,
"summary": str} out, one response per request, every line flushed. Malformed
request lines get {"id": null, "error": ...} and the loop keeps serving.

This is deliberately tiny and stateless: it documents the protocol, serves
as a conformance fixture for the host's external-CSS integration, and is
the template to copy when wiring in a real trained summarizer. It has no
dependencies beyond the standard library and never imports the host
package.

Strategies:
  echo-first      summary = texts[0]
  lead-sentences  first sentence of each text, joined, capped at 60 words
  oracle-file     canned summaries keyed by request id (--oracle FILE)
"""

from __future__ import annotations

import argparse
import json
import re
import sys

LEAD_TOKEN_CAP = 60

_SENTENCE_BREAK = re.compile(r"(?<=[.!?])\s+")


def first_sentence(text: str) -> str:
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        return _SENTENCE_BREAK.split(line)[0].strip()
    return ""


def lead_sentences(texts: list[str], cap: int = LEAD_TOKEN_CAP) -> str:
    words: list[str] = []
    for text in texts:
        lead = first_sentence(text)
        if not lead:
            continue
        words.extend(lead.split())
        if len(words) >= cap:
            break
    return " ".join(words[:cap])


def summarize(request: dict, strategy: str, oracle: dict) -> str:
    texts = request.get("texts")
    if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
        raise ValueError("request must carry a list of texts")
    if strategy == "echo-first":
        if not texts:
            raise ValueError("empty texts")
        return texts[0]
    if strategy == "lead-sentences":
        return lead_sentences(texts)
    if strategy == "oracle-file":
        request_id = request.get("id")
        if request_id not in oracle:
            raise ValueError(f"no oracle summary for id {request_id!r}")
        return oracle[request_id]
    raise ValueError(f"unknown strategy {strategy!r}")


def serve_loop(stdin, stdout, strategy: str, oracle: dict | None = None) -> None:
    oracle = oracle or {}
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        request = None
        try:
            request = json.loads(line)
            if not isinstance(request, dict) or "id" not in request:
                raise ValueError("request must be an object with an id")
            response = {"id": request["id"], "summary": summarize(request, strategy, oracle)}
        except Exception as exc:  # stay alive on malformed input
            request_id = request.get("id") if isinstance(request, dict) else None
            response = {"id": request_id if isinstance(request_id, str) else None,
                        "error": str(exc)}
        stdout.write(json.dumps(response, ensure_ascii=False) + "\n")
        stdout.flush()


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--strategy",
        choices=["echo-first", "lead-sentences", "oracle-file"],
        default="echo-first",
    )
    parser.add_argument("--oracle", help="JSON file mapping request id -> summary")
    args = parser.parse_args()
    oracle = {}
    if args.strategy == "oracle-file":
        if not args.oracle:
            parser.error("--strategy oracle-file requires --oracle FILE")
        with open(args.oracle, "r", encoding="utf-8") as handle:
            oracle = json.load(handle)
    serve_loop(sys.stdin, sys.stdout, args.strategy, oracle)


if __name__ == "__main__":
    main()
