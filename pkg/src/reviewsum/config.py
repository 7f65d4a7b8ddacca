"""Run configuration and deterministic seed derivation.

Defaults mirror the hyperparameters the pipeline was designed around:
clusters grow to at least 3 reviews and about 50 sentences, near-duplicate
sentences are dropped at 0.7 similarity, lead baselines cap at 100 tokens,
reviews outside [15, 400] words are ignored where a window applies.
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path


@dataclass
class Config:
    min_rev: int = 3
    max_len: int = 50  # sentences per cluster
    max_edit_dist: float = 0.7
    lead_limit: int = 100  # tokens for multi-lead-1
    min_tokens: int = 15
    max_tokens_baseline: int = 400
    novel_precision_min: float = 0.5
    ref_min_tokens: int = 20
    seed: int = 0
    annotation_max_sentences: int = 50
    css_budget_tokens: int = 60

    def __post_init__(self) -> None:
        if self.min_rev < 2:
            raise ValueError("min_rev must be >= 2")
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")
        for name in ("max_edit_dist", "novel_precision_min"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")

    def to_dict(self) -> dict:
        return asdict(self)


_FIELD_TYPES = {f.name: f.type for f in fields(Config)}


def _coerce(name: str, raw: str):
    if name not in _FIELD_TYPES:
        raise ValueError(f"unknown config key: {name}")
    kind = _FIELD_TYPES[name]
    return float(raw) if kind == "float" else int(raw)


def load_config_file(path: str | Path) -> dict:
    """Parse a `key = value` text file into a Config kwargs dict."""
    overrides = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        name, raw = (part.strip() for part in line.split("=", 1))
        overrides[name] = _coerce(name, raw)
    return overrides


def make_config(file: str | Path | None = None, **overrides) -> Config:
    kwargs = load_config_file(file) if file else {}
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return Config(**kwargs)


def derive_seed(global_seed: int, *parts) -> int:
    """Stable sub-seed for a named unit of work, identical across platforms."""
    key = "\x1f".join([str(global_seed), *map(str, parts)])
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") & 0x7FFF_FFFF_FFFF_FFFF
