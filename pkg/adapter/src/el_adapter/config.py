"""Adapter configuration: which model to serve and how to map its ids."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml


class AdapterConfigError(Exception):
    pass


@dataclass
class AdapterConfig:
    model_name: str
    mapping_file: Path
    device: str = "cpu"
    port: int = 8900
    score_mode: str = "softmax"  # softmax | passthrough
    lexicon: Path | None = None  # demo model asset
    nil_fallback: bool = False  # drop model ids missing from the mapping

    def __post_init__(self) -> None:
        if self.score_mode not in ("softmax", "passthrough"):
            raise AdapterConfigError(f"score_mode must be softmax or passthrough, got {self.score_mode!r}")


def _as_path(base: Path, value) -> Path:
    path = Path(str(value))
    return path if path.is_absolute() else base / path


def load_adapter_config(path: str | Path) -> AdapterConfig:
    path = Path(path)
    if not path.exists():
        raise AdapterConfigError(f"config file not found: {path}")
    raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise AdapterConfigError("config root must be a mapping")
    for key in ("model_name", "mapping_file"):
        if key not in raw:
            raise AdapterConfigError(f"config needs {key!r}")
    base = path.parent
    return AdapterConfig(
        model_name=str(raw["model_name"]),
        mapping_file=_as_path(base, raw["mapping_file"]),
        device=str(raw.get("device", "cpu")),
        port=int(raw.get("port", 8900)),
        score_mode=str(raw.get("score_mode", "softmax")),
        lexicon=_as_path(base, raw["lexicon"]) if raw.get("lexicon") else None,
        nil_fallback=bool(raw.get("nil_fallback", False)),
    )
