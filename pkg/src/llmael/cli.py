"""Command-line front door for the pipeline.

Subcommands mirror the pipeline stages: augment, fuse, link, vote, eval,
buckets, make-train, and run (augment -> fuse -> link -> eval). Runs with
the mock provider and the baseline backend are bit-reproducible.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import ensemble, evaluation, fusion, gateway
from .config import ConfigError, PipelineConfig, load_config
from .core import Dataset, MentionContext, PipelineError
from .fusion import FusedContext
from .io import (
    PredictionSet,
    load_augmentations,
    load_dataset,
    load_kb,
    load_predictions,
    save_augmentations,
    save_dataset,
    save_predictions,
)
from .linker import NO_PREDICTION, BaselineBackend, RankedPrediction, RemoteBackend, link_all

log = logging.getLogger("llmael")


# -- artifact naming ----------------------------------------------------------


def aug_path(cfg: PipelineConfig, name: str) -> Path:
    return cfg.out / f"{name}.aug.jsonl"


def fused_path(cfg: PipelineConfig, name: str) -> Path:
    return cfg.out / f"{name}.fused-s{cfg.strategy_id}.jsonl"


def pred_path(cfg: PipelineConfig, name: str, system: str) -> Path:
    return cfg.out / f"{name}.pred-{system}.jsonl"


def default_system(cfg: PipelineConfig, raw: bool = False) -> str:
    if cfg.system:
        return cfg.system
    base = cfg.backend.kind
    return f"{base}-raw" if raw else f"{base}-s{cfg.strategy_id}"


# -- shared construction ------------------------------------------------------


def make_provider(cfg: PipelineConfig) -> gateway.Provider:
    if cfg.provider.kind == "mock":
        knowledge = None
        if cfg.provider.knowledge is not None:
            knowledge = json.loads(cfg.provider.knowledge.read_text(encoding="utf-8"))
        return gateway.MockProvider(model=cfg.provider.model or "echo-1", knowledge=knowledge)
    return gateway.HttpProvider(
        endpoint=cfg.provider.endpoint or "",
        model=cfg.provider.model,
        api_key=os.environ.get("LLMAEL_API_KEY"),
        style=cfg.provider.style,
    )


def make_backend(cfg: PipelineConfig):
    if cfg.backend.kind == "baseline":
        return BaselineBackend(load_kb(cfg.kb_path))
    return RemoteBackend(endpoint=cfg.backend.endpoint or "")


def _prompt_kind(cfg: PipelineConfig) -> gateway.PromptKind:
    if cfg.prompt == "zero-shot":
        return gateway.PromptKind.AUGMENT_ZERO_SHOT
    return gateway.PromptKind.AUGMENT_THREE_SHOT


def _record_to_fused(record: MentionContext) -> FusedContext:
    return FusedContext(
        text=record.context,
        start=record.start,
        length=record.length,
        surface=record.surface,
        strategy_id=int(record.extra.get("strategy_id", -1)),
        fallback_applied=bool(record.extra.get("fallback_applied", False)),
    )


# -- commands -----------------------------------------------------------------


def cmd_augment(cfg: PipelineConfig, cache_flag: str | None = None) -> list[Path]:
    """Generate one description per mention for every configured dataset."""
    provider = make_provider(cfg)
    cache = gateway.CompletionCache(cfg.resolve_cache(cache_flag))
    cfg.out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, path in cfg.datasets:
        dataset = load_dataset(path, name=name)
        aug = gateway.augment_dataset(
            dataset,
            provider,
            cfg.params,
            cache,
            kind=_prompt_kind(cfg),
            concurrency=cfg.concurrency,
        )
        target = aug_path(cfg, name)
        save_augmentations(aug, target)
        log.info("augment: %s -> %s (%d/%d records)", name, target, len(aug.records), len(dataset))
        written.append(target)
    return written


def cmd_fuse(cfg: PipelineConfig) -> list[Path]:
    """Join stored augmentations with their datasets under the configured strategy."""
    strategy = fusion.strategy(cfg.strategy_id)
    cfg.out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, path in cfg.datasets:
        dataset = load_dataset(path, name=name)
        aug = load_augmentations(aug_path(cfg, name))
        fused = fusion.augment_training_set(dataset, aug, strategy)
        if cfg.truncation is not None:
            fused = _truncate_dataset(fused, cfg.truncation)
        target = fused_path(cfg, name)
        save_dataset(fused, target)
        log.info("fuse: %s -> %s (strategy %d)", name, target, cfg.strategy_id)
        written.append(target)
    return written


def _truncate_dataset(dataset: Dataset, max_chars: int) -> Dataset:
    records = []
    for record in dataset.records:
        fc = fusion.truncate(_record_to_fused(record), max_chars)
        records.append(
            MentionContext(
                doc_id=record.doc_id,
                context=fc.text,
                start=fc.start,
                length=fc.length,
                surface=record.surface,
                gold_entity_id=record.gold_entity_id,
                extra=dict(record.extra),
            )
        )
    return Dataset(dataset.name, tuple(records))


def cmd_link(cfg: PipelineConfig, raw: bool = False, system: str | None = None) -> list[Path]:
    """Link fused datasets (or the original contexts with ``raw``)."""
    backend = make_backend(cfg)
    label = system or default_system(cfg, raw=raw)
    cfg.out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, path in cfg.datasets:
        source = path if raw else fused_path(cfg, name)
        dataset = load_dataset(source, name=name)
        preds = PredictionSet(system=label)
        results = link_all(
            backend,
            (_record_to_fused(r) for r in dataset.records),
            cfg.top_k,
            concurrency=cfg.concurrency,
        )
        for record, prediction in zip(dataset.records, results):
            preds.records[record.key] = prediction
        target = pred_path(cfg, name, label)
        save_predictions(preds, target)
        log.info("link: %s -> %s (%s)", name, target, backend.name)
        written.append(target)
    return written


def cmd_vote(mode: str, files: list[Path], out_file: Path) -> Path:
    """Ensemble prediction files from multiple systems into one."""
    if mode not in ("hard", "soft"):
        raise ConfigError(f"vote mode must be hard or soft, got {mode!r}")
    sets = [load_predictions(f) for f in files]
    label = ensemble.vote_label(mode, sorted(s.system for s in sets))
    keys = sorted({key for s in sets for key in s.records})
    combined = PredictionSet(system=label)
    for key in keys:
        inputs = [
            ensemble.VoteInput(s.system, s.records[key]) for s in sets if key in s.records
        ]
        winner = ensemble.hard_vote(inputs) if mode == "hard" else ensemble.soft_vote(inputs)
        combined.records[key] = (
            RankedPrediction(((winner, 1.0),)) if winner is not None else NO_PREDICTION
        )
    out_file.parent.mkdir(parents=True, exist_ok=True)
    save_predictions(combined, out_file)
    log.info("vote: %s over %d systems -> %s", mode, len(sets), out_file)
    return out_file


def _load_pred_args(entries: list[str]) -> list[tuple[str, Path]]:
    pairs = []
    for entry in entries:
        if "=" not in entry:
            raise ConfigError(f"--pred must be dataset=path, got {entry!r}")
        name, _, path = entry.partition("=")
        pairs.append((name, Path(path)))
    return pairs


def cmd_eval(cfg: PipelineConfig, pred_entries: list[tuple[str, Path]]) -> evaluation.ScoreTable:
    """Score prediction files against their datasets and write report tables."""
    gold = {name: load_dataset(path, name=name) for name, path in cfg.datasets}
    order = [name for name, _ in cfg.datasets]
    preds_by_system: dict[str, dict[str, PredictionSet]] = {}
    for dataset_name, path in pred_entries:
        if dataset_name not in gold:
            raise ConfigError(f"unknown dataset {dataset_name!r} in --pred")
        preds = load_predictions(path)
        preds_by_system.setdefault(preds.system, {})[dataset_name] = preds
    table = evaluation.build_score_table(preds_by_system, gold, order, cfg.include_nil)
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "scores.md").write_text(evaluation.emit_report(table, "markdown"), encoding="utf-8")
    (cfg.out / "scores.csv").write_text(evaluation.emit_report(table, "csv"), encoding="utf-8")
    print(evaluation.emit_report(table, "markdown"), end="")
    return table


def cmd_buckets(cfg: PipelineConfig, pred_entries: list[tuple[str, Path]]) -> list:
    """Entity-frequency bucket analysis for one system across datasets."""
    kb = load_kb(cfg.kb_path)
    gold_by_name = {name: load_dataset(path, name=name) for name, path in cfg.datasets}
    preds, gold = [], []
    for dataset_name, path in pred_entries:
        if dataset_name not in gold_by_name:
            raise ConfigError(f"unknown dataset {dataset_name!r} in --pred")
        preds.append(load_predictions(path))
        gold.append(gold_by_name[dataset_name])
    buckets, excluded = evaluation.bucket_accuracy(preds, gold, kb, cfg.include_nil)
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "buckets.md").write_text(evaluation.emit_report(buckets, "markdown"), encoding="utf-8")
    (cfg.out / "buckets.csv").write_text(evaluation.emit_report(buckets, "csv"), encoding="utf-8")
    (cfg.out / "buckets.jsonl").write_text(evaluation.bucket_records(buckets), encoding="utf-8")
    log.info("buckets: %d buckets, %d mentions excluded", len(buckets), excluded)
    print(evaluation.emit_report(buckets, "markdown"), end="")
    return buckets


def cmd_make_train(cfg: PipelineConfig, cache_flag: str | None = None) -> list[Path]:
    """Produce fused dataset files for fine-tuning an external linker."""
    cmd_augment(cfg, cache_flag)
    return cmd_fuse(cfg)


def cmd_run(cfg: PipelineConfig, cache_flag: str | None = None) -> evaluation.ScoreTable:
    """Full chain: augment -> fuse -> link -> eval."""
    cmd_augment(cfg, cache_flag)
    cmd_fuse(cfg)
    cmd_link(cfg)
    label = default_system(cfg)
    entries = [(name, pred_path(cfg, name, label)) for name, _ in cfg.datasets]
    return cmd_eval(cfg, entries)


# -- argument parsing ---------------------------------------------------------


def _apply_overrides(cfg: PipelineConfig, args: argparse.Namespace) -> PipelineConfig:
    if getattr(args, "strategy", None) is not None:
        if args.strategy not in range(5):
            raise ConfigError(f"strategy must be in 0..4, got {args.strategy}")
        cfg.strategy_id = args.strategy
    if getattr(args, "backend", None):
        cfg.backend.kind = args.backend
    if getattr(args, "provider", None):
        cfg.provider.kind = args.provider
    if getattr(args, "out", None):
        cfg.out = Path(args.out)
    if getattr(args, "top_k", None) is not None:
        cfg.top_k = args.top_k
    if getattr(args, "max_chars", None) is not None:
        cfg.truncation = args.max_chars
    if getattr(args, "include_nil", False):
        cfg.include_nil = True
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="llmael", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="pipeline config manifest (YAML)")
        p.add_argument("--strategy", type=int, help="context-joining strategy id (0..4)")
        p.add_argument("--backend", choices=["baseline", "remote"], help="linker backend")
        p.add_argument("--provider", choices=["mock", "http"], help="completion provider")
        p.add_argument("--cache", help="completion cache file (default: LLMAEL_CACHE or out dir)")
        p.add_argument("--out", help="artifact output directory")
        p.add_argument("--top-k", type=int, dest="top_k", help="candidates per prediction")
        p.add_argument("--max-chars", type=int, dest="max_chars", help="fused context truncation")
        p.add_argument("--include-nil", action="store_true", help="score NIL-gold mentions too")

    for name in ("augment", "fuse", "link", "eval", "buckets", "make-train", "run"):
        p = sub.add_parser(name)
        add_common(p)
        if name == "link":
            p.add_argument("--raw", action="store_true", help="link original contexts, no fusion")
            p.add_argument("--system", help="system label for the prediction file")
        if name in ("eval", "buckets"):
            p.add_argument(
                "--pred", action="append", default=[], metavar="DATASET=PATH",
                help="prediction file for a configured dataset (repeatable)",
            )

    vote = sub.add_parser("vote")
    vote.add_argument("--mode", choices=["hard", "soft"], required=True)
    vote.add_argument("--out-file", required=True, help="ensemble prediction output path")
    vote.add_argument("files", nargs="+", help="prediction files to combine")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "vote":
            cmd_vote(args.mode, [Path(f) for f in args.files], Path(args.out_file))
            return 0
        cfg = _apply_overrides(load_config(args.config), args)
        if args.command == "augment":
            cmd_augment(cfg, args.cache)
        elif args.command == "fuse":
            cmd_fuse(cfg)
        elif args.command == "link":
            cmd_link(cfg, raw=args.raw, system=args.system)
        elif args.command == "eval":
            cmd_eval(cfg, _load_pred_args(args.pred))
        elif args.command == "buckets":
            cmd_buckets(cfg, _load_pred_args(args.pred))
        elif args.command == "make-train":
            cmd_make_train(cfg, args.cache)
        elif args.command == "run":
            cmd_run(cfg, args.cache)
        return 0
    except (PipelineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
