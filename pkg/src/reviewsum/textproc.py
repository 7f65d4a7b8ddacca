"""Deterministic text normalization shared by every other module.

Sentence boundaries are `.`, `!`, `?` followed by whitespace, plus newlines.
Tokens are maximal [a-z0-9] runs of the lowercased text. Stems come from the
bundled Porter stemmer, stopword flags from the bundled list; n-grams never
cross sentence boundaries.

Two token counts coexist on purpose: `whitespace_token_count` (raw words,
used for all length limits such as the 15/400-word review filters) and the
tokenizer's alphanumeric tokens (used for all matching and scoring).
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

from .porter import PORTER_VERSION, stem_word
from .stopwords import STOPWORDS, STOPWORDS_VERSION

__all__ = [
    "TokenizedText",
    "NgramDistribution",
    "tokenize",
    "ngrams",
    "stem_set",
    "split_sentences",
    "whitespace_token_count",
    "PORTER_VERSION",
    "STOPWORDS_VERSION",
]

_SENTENCE_BREAK = re.compile(r"(?<=[.!?])\s+")
_TOKEN = re.compile(r"[a-z0-9]+")
_HAS_ALNUM = re.compile(r"[A-Za-z0-9]")


def split_sentences(text: str) -> list[str]:
    """Raw sentence strings; pieces without alphanumeric content are dropped."""
    sentences = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        for piece in _SENTENCE_BREAK.split(line):
            if _HAS_ALNUM.search(piece):
                sentences.append(piece.strip())
    return sentences


def whitespace_token_count(text: str) -> int:
    """Raw whitespace-delimited word count, used for all length limits."""
    return len(text.split())


@dataclass
class TokenizedText:
    """Sentences as lowercase tokens, with parallel stems and content flags."""

    sentences: list[list[str]]
    stems: list[list[str]]
    content_flags: list[list[bool]]

    def flat_stems(self) -> list[str]:
        return [s for sentence in self.stems for s in sentence]

    @property
    def num_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)

    @property
    def num_sentences(self) -> int:
        return len(self.sentences)


@dataclass
class NgramDistribution:
    n: int
    counts: Counter = field(default_factory=Counter)
    total: int = 0


def tokenize(text: str) -> TokenizedText:
    sentences = [_TOKEN.findall(s.lower()) for s in split_sentences(text)]
    stems = [[stem_word(t) for t in sent] for sent in sentences]
    flags = [[t not in STOPWORDS for t in sent] for sent in sentences]
    return TokenizedText(sentences=sentences, stems=stems, content_flags=flags)


def ngrams(text: TokenizedText, n: int, content_only: bool = False) -> NgramDistribution:
    """Within-sentence n-grams over stems.

    With content_only, any n-gram whose window contains a stopword token is
    dropped (the window is taken over the original sentence, not a compacted
    one).
    """
    if not 1 <= n <= 3:
        raise ValueError(f"n must be in 1..3, got {n}")
    dist = NgramDistribution(n=n)
    for stems, flags in zip(text.stems, text.content_flags):
        for i in range(len(stems) - n + 1):
            if content_only and not all(flags[i : i + n]):
                continue
            dist.counts[tuple(stems[i : i + n])] += 1
            dist.total += 1
    return dist


def stem_set(text: TokenizedText, content_only: bool = False) -> set[str]:
    out: set[str] = set()
    for stems, flags in zip(text.stems, text.content_flags):
        for s, flag in zip(stems, flags):
            if flag or not content_only:
                out.add(s)
    return out
