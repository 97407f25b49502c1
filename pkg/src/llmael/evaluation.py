"""Scoring: disambiguation accuracy, macro averages, entity-frequency
buckets, and report rendering.

Internal arithmetic runs at full precision; the 2-decimal half-up rounding
exists only at display boundaries (and in :func:`macro_average`, whose
published fixtures are stated at that precision).
"""

from __future__ import annotations

import csv
import io as _stdio
import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

from .core import Dataset, Entity, KnowledgeBase, PipelineError
from .io import PredictionSet


class EmptyDataset(PipelineError):
    pass


class EmptyList(PipelineError):
    pass


def round2(value: float) -> float:
    """Round half-up to two decimals (table display convention)."""
    return float(Decimal(repr(float(value))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def fmt2(value: float) -> str:
    return f"{Decimal(repr(float(value))).quantize(Decimal('0.01'), rounding=ROUND_HALF_UP):.2f}"


def accuracy(preds: PredictionSet, gold: Dataset, include_nil: bool = False) -> float:
    """Percentage of scored mentions whose top-1 prediction equals gold.

    NIL-gold mentions are excluded unless ``include_nil``. A mention that is
    missing from the predictions, or predicted as no-prediction, counts as
    incorrect.
    """
    scored = 0
    correct = 0
    for record in gold.records:
        if record.is_nil and not include_nil:
            continue
        scored += 1
        prediction = preds.records.get(record.key)
        if prediction is None or prediction.no_prediction or not prediction.candidates:
            continue
        if prediction.candidates[0][0] == record.gold_entity_id:
            correct += 1
    if scored == 0:
        raise EmptyDataset(f"dataset {gold.name!r} has no scorable mentions")
    return 100.0 * correct / scored


def macro_average(scores: Sequence[float]) -> float:
    """Unweighted arithmetic mean of per-dataset accuracies, at display
    precision (half-up, two decimals)."""
    if not scores:
        raise EmptyList("cannot average an empty score list")
    mean = sum(Decimal(repr(float(s))) for s in scores) / len(scores)
    return float(mean.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


@dataclass
class ScoreTable:
    """Accuracy percentages per system and dataset, with the AVG column."""

    datasets: list[str]
    rows: dict[str, dict[str, float]] = field(default_factory=dict)

    def add(self, system: str, dataset: str, value: float) -> None:
        self.rows.setdefault(system, {})[dataset] = value

    def avg(self, system: str) -> float:
        row = self.rows[system]
        return macro_average([row[d] for d in self.datasets if d in row])


def build_score_table(
    preds_by_system: dict[str, dict[str, PredictionSet]],
    gold_by_dataset: dict[str, Dataset],
    dataset_order: Sequence[str] | None = None,
    include_nil: bool = False,
) -> ScoreTable:
    order = list(dataset_order) if dataset_order is not None else sorted(gold_by_dataset)
    table = ScoreTable(datasets=order)
    for system in sorted(preds_by_system):
        for dataset_name, preds in preds_by_system[system].items():
            table.add(system, dataset_name, accuracy(preds, gold_by_dataset[dataset_name], include_nil))
    return table


# -- frequency buckets --------------------------------------------------------


@dataclass
class FrequencyBucket:
    """All entities whose pagerank falls in [10^exponent, 10^(exponent+1))."""

    exponent: int
    n_entities: int = 0
    n_mentions: int = 0
    accuracy: float = 0.0


def pagerank_exponent(pagerank: float) -> int:
    """floor(log10(p)), stabilized against float fuzz at decade boundaries."""
    exponent = math.floor(math.log10(pagerank))
    while 10.0**exponent > pagerank:
        exponent -= 1
    while 10.0 ** (exponent + 1) <= pagerank:
        exponent += 1
    return exponent


def bucket_by_frequency(entities: Iterable[Entity]) -> tuple[list[FrequencyBucket], int]:
    """Assign entities to decade buckets of their pagerank.

    Returns bucket shells (counts only) for the populated exponent range,
    ascending, plus the count of entities excluded for missing or
    non-positive pagerank.
    """
    excluded = 0
    counts: dict[int, int] = {}
    for entity in entities:
        if entity.pagerank is None or entity.pagerank <= 0:
            excluded += 1
            continue
        exponent = pagerank_exponent(entity.pagerank)
        counts[exponent] = counts.get(exponent, 0) + 1
    buckets = [FrequencyBucket(e, n_entities=counts[e]) for e in sorted(counts)]
    return buckets, excluded


def bucket_accuracy(
    preds: Sequence[PredictionSet],
    gold: Sequence[Dataset],
    kb: KnowledgeBase,
    include_nil: bool = False,
) -> tuple[list[FrequencyBucket], int]:
    """Cross-dataset accuracy per gold entity, averaged within each bucket.

    ``preds[i]`` scores ``gold[i]``. Each entity's accuracy is computed over
    all its mentions across all datasets first; bucket accuracy is the
    unweighted mean over its entities. Returns the populated buckets plus the
    number of scored mentions excluded because their gold entity has no
    usable pagerank (or is absent from the knowledge base).
    """
    if len(preds) != len(gold):
        raise ValueError("preds and gold must be parallel lists")
    mention_counts: dict[str, int] = {}
    correct_counts: dict[str, int] = {}
    excluded_mentions = 0
    for prediction_set, dataset in zip(preds, gold):
        for record in dataset.records:
            if record.is_nil and not include_nil:
                continue
            entity = kb.get(record.gold_entity_id)
            if entity is None or entity.pagerank is None or entity.pagerank <= 0:
                excluded_mentions += 1
                continue
            mention_counts[entity.id] = mention_counts.get(entity.id, 0) + 1
            prediction = prediction_set.records.get(record.key)
            if (
                prediction is not None
                and not prediction.no_prediction
                and prediction.candidates
                and prediction.candidates[0][0] == record.gold_entity_id
            ):
                correct_counts[entity.id] = correct_counts.get(entity.id, 0) + 1

    per_bucket: dict[int, list[tuple[str, float, int]]] = {}
    for entity_id, total in mention_counts.items():
        entity_accuracy = 100.0 * correct_counts.get(entity_id, 0) / total
        exponent = pagerank_exponent(kb.entities[entity_id].pagerank)  # type: ignore[arg-type]
        per_bucket.setdefault(exponent, []).append((entity_id, entity_accuracy, total))

    buckets = []
    for exponent in sorted(per_bucket):
        members = per_bucket[exponent]
        buckets.append(
            FrequencyBucket(
                exponent=exponent,
                n_entities=len(members),
                n_mentions=sum(m[2] for m in members),
                accuracy=math.fsum(m[1] for m in members) / len(members),
            )
        )
    return buckets, excluded_mentions


# -- report rendering ---------------------------------------------------------


def emit_report(table: "ScoreTable | list[FrequencyBucket]", format: str = "markdown") -> str:
    """Render a score table or bucket list; deterministic for identical input.

    Score tables list datasets in config order with AVG last; all numbers are
    half-up 2-decimal formatted.
    """
    if format not in ("markdown", "csv"):
        raise ValueError(f"unknown report format {format!r}")
    if isinstance(table, ScoreTable):
        header = ["system", *table.datasets, "AVG"]
        body = [
            [system]
            + [fmt2(table.rows[system][d]) if d in table.rows[system] else "" for d in table.datasets]
            + [fmt2(table.avg(system))]
            for system in sorted(table.rows)
        ]
    else:
        header = ["bucket_exponent", "n_entities", "n_mentions", "accuracy"]
        body = [
            [str(b.exponent), str(b.n_entities), str(b.n_mentions), fmt2(b.accuracy)]
            for b in table
        ]
    if format == "csv":
        buffer = _stdio.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(body)
        return buffer.getvalue()
    lines = [
        "| " + " | ".join(header) + " |",
        "| " + " | ".join("---" for _ in header) + " |",
    ]
    for row in body:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def bucket_records(buckets: Sequence[FrequencyBucket]) -> str:
    """JSONL bucket records for downstream plotting."""
    lines = [
        json.dumps(
            {
                "exponent": b.exponent,
                "n_entities": b.n_entities,
                "n_mentions": b.n_mentions,
                "accuracy": b.accuracy,
            }
        )
        for b in buckets
    ]
    return "\n".join(lines) + ("\n" if lines else "")
