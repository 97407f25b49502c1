"""Declarative pipeline configuration loaded from YAML manifests.

Relative paths in a manifest resolve against the manifest's directory, so
experiment configs can live next to their data.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .core import PipelineError
from .fusion import DEFAULT_STRATEGY_ID
from .gateway import GenerationParams
from .linker import DEFAULT_TOP_K


class ConfigError(PipelineError):
    pass


@dataclass
class ProviderConfig:
    kind: str = "mock"  # mock | http
    model: str = ""
    endpoint: str | None = None
    knowledge: Path | None = None  # mock only: cue -> fact table
    style: str = "chat"  # http request shape: chat | completion


@dataclass
class BackendConfig:
    kind: str = "baseline"  # baseline | remote
    endpoint: str | None = None


@dataclass
class PipelineConfig:
    kb_path: Path
    datasets: list[tuple[str, Path]]
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    params: GenerationParams = field(default_factory=GenerationParams)
    strategy_id: int = DEFAULT_STRATEGY_ID
    backend: BackendConfig = field(default_factory=BackendConfig)
    truncation: int | None = None
    top_k: int = DEFAULT_TOP_K
    include_nil: bool = False
    cache: Path | None = None
    out: Path = Path("out")
    system: str | None = None
    concurrency: int = 1
    prompt: str = "three-shot"  # three-shot | zero-shot

    def resolve_cache(self, flag_value: str | None = None) -> Path:
        """Cache path precedence: --cache flag, LLMAEL_CACHE, config, out dir."""
        if flag_value:
            return Path(flag_value)
        env = os.environ.get("LLMAEL_CACHE")
        if env:
            return Path(env)
        if self.cache is not None:
            return self.cache
        return self.out / "cache.jsonl"


def _as_path(base: Path, value) -> Path:
    path = Path(str(value))
    return path if path.is_absolute() else base / path


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    base = path.parent
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")

    if "kb" not in raw:
        raise ConfigError("config needs a 'kb' path")
    kb_path = _as_path(base, raw["kb"])

    datasets: list[tuple[str, Path]] = []
    for entry in raw.get("datasets", []):
        if not isinstance(entry, dict) or "name" not in entry or "path" not in entry:
            raise ConfigError("each dataset entry needs 'name' and 'path'")
        datasets.append((str(entry["name"]), _as_path(base, entry["path"])))
    if not datasets:
        raise ConfigError("config needs at least one dataset")

    provider_raw = raw.get("provider", {}) or {}
    provider = ProviderConfig(
        kind=str(provider_raw.get("kind", "mock")),
        model=str(provider_raw.get("model", "")),
        endpoint=provider_raw.get("endpoint"),
        knowledge=_as_path(base, provider_raw["knowledge"]) if provider_raw.get("knowledge") else None,
        style=str(provider_raw.get("style", "chat")),
    )
    if provider.kind not in ("mock", "http"):
        raise ConfigError(f"provider.kind must be mock or http, got {provider.kind!r}")
    if provider.kind == "http" and not provider.endpoint:
        raise ConfigError("http provider needs an endpoint")

    params_raw = raw.get("params", {}) or {}
    try:
        params = GenerationParams(
            max_tokens=int(params_raw.get("max_tokens", GenerationParams().max_tokens)),
            temperature=float(params_raw.get("temperature", GenerationParams().temperature)),
            extra=tuple(sorted((str(k), str(v)) for k, v in (params_raw.get("extra") or {}).items())),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid generation params: {exc}") from exc

    backend_raw = raw.get("backend", {}) or {}
    backend = BackendConfig(
        kind=str(backend_raw.get("kind", "baseline")),
        endpoint=backend_raw.get("endpoint"),
    )
    if backend.kind not in ("baseline", "remote"):
        raise ConfigError(f"backend.kind must be baseline or remote, got {backend.kind!r}")
    if backend.kind == "remote" and not backend.endpoint:
        raise ConfigError("remote backend needs an endpoint")

    strategy_id = int(raw.get("strategy", DEFAULT_STRATEGY_ID))
    if strategy_id not in range(5):
        raise ConfigError(f"strategy must be in 0..4, got {strategy_id}")

    truncation = raw.get("truncation")
    prompt = str(raw.get("prompt", "three-shot"))
    if prompt not in ("three-shot", "zero-shot"):
        raise ConfigError(f"prompt must be three-shot or zero-shot, got {prompt!r}")

    config = PipelineConfig(
        kb_path=kb_path,
        datasets=datasets,
        provider=provider,
        params=params,
        strategy_id=strategy_id,
        backend=backend,
        truncation=int(truncation) if truncation is not None else None,
        top_k=int(raw.get("top_k", DEFAULT_TOP_K)),
        include_nil=bool(raw.get("include_nil", False)),
        cache=_as_path(base, raw["cache"]) if raw.get("cache") else None,
        out=_as_path(base, raw.get("out", "out")),
        system=str(raw["system"]) if raw.get("system") else None,
        concurrency=int(raw.get("concurrency", 1)),
        prompt=prompt,
    )
    validate_paths(config)
    return config


def validate_paths(config: PipelineConfig) -> None:
    if not config.kb_path.exists():
        raise ConfigError(f"knowledge base file not found: {config.kb_path}")
    for name, dataset_path in config.datasets:
        if not dataset_path.exists():
            raise ConfigError(f"dataset {name!r} file not found: {dataset_path}")
    if config.provider.knowledge is not None and not config.provider.knowledge.exists():
        raise ConfigError(f"knowledge table not found: {config.provider.knowledge}")
