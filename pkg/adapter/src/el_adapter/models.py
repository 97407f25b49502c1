"""Model loading and score normalization.

A wrapped model returns raw (internal_id, title, score) rows; this module
converts scores into a probability list (softmax for unnormalized scores,
pass-through for calibrated ones) and translates internal ids into pipeline
entity ids through the configured mapping.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Protocol

from .config import AdapterConfig, AdapterConfigError

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def _tokens(text: str) -> set[str]:
    return {t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= 2}


@dataclass(frozen=True)
class ScoredCandidate:
    internal_id: str
    title: str
    score: float


class Model(Protocol):
    name: str

    def predict(self, context: str, start: int, length: int, top_k: int) -> list[ScoredCandidate]: ...


class LexiconModel:
    """Deterministic stand-in model scoring a fixed lexicon by token overlap.

    Serves as the wiring demo and the conformance-test backbone; real neural
    models plug in behind the same predict() surface.
    """

    def __init__(self, name: str, entries: list[dict]):
        self.name = name
        self.entries = [
            (str(e["internal_id"]), str(e["title"]), _tokens(str(e.get("text", ""))))
            for e in entries
        ]

    def predict(self, context: str, start: int, length: int, top_k: int) -> list[ScoredCandidate]:
        mention = context[start : start + length]
        context_tokens = _tokens(context) - _tokens(mention)
        scored = [
            ScoredCandidate(internal_id, title, float(len(context_tokens & text_tokens)))
            for internal_id, title, text_tokens in self.entries
        ]
        scored.sort(key=lambda c: (-c.score, c.internal_id))
        return scored[:top_k]


def load_model(config: AdapterConfig) -> Model:
    if config.model_name == "demo":
        if config.lexicon is None:
            raise AdapterConfigError("demo model needs a lexicon file")
        entries = json.loads(config.lexicon.read_text(encoding="utf-8"))
        return LexiconModel("demo", entries)
    raise AdapterConfigError(
        f"model {config.model_name!r} is not bundled; wrap it behind the Model protocol"
    )


class IdMapper:
    """Internal model ids to pipeline entity ids; total unless a NIL fallback
    is declared, in which case unmapped ids drop out of the candidate list."""

    def __init__(self, mapping: dict[str, str], nil_fallback: bool):
        self.mapping = mapping
        self.nil_fallback = nil_fallback

    @classmethod
    def from_config(cls, config: AdapterConfig, model: Model) -> "IdMapper":
        raw = json.loads(config.mapping_file.read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise AdapterConfigError("mapping file must hold an object of internal -> entity ids")
        mapper = cls({str(k): str(v) for k, v in raw.items()}, config.nil_fallback)
        if isinstance(model, LexiconModel) and not config.nil_fallback:
            missing = [i for i, _, _ in model.entries if i not in mapper.mapping]
            if missing:
                raise AdapterConfigError(
                    f"mapping is not total over the model output space ({missing[:3]}...); "
                    "declare nil_fallback or complete the mapping"
                )
        return mapper

    def resolve(self, internal_id: str) -> str | None:
        mapped = self.mapping.get(internal_id)
        if mapped is None and not self.nil_fallback:
            raise AdapterConfigError(f"no mapping for model id {internal_id!r}")
        return mapped


def to_probabilities(candidates: list[ScoredCandidate], mode: str) -> list[float]:
    """Normalize model scores into a probability list summing to one."""
    if not candidates:
        return []
    scores = [c.score for c in candidates]
    if mode == "passthrough":
        total = sum(scores)
        if total <= 0:
            raise AdapterConfigError("passthrough scores must sum to a positive value")
        return [s / total for s in scores]
    peak = max(scores)
    weights = [math.exp(s - peak) for s in scores]
    total = sum(weights)
    return [w / total for w in weights]
