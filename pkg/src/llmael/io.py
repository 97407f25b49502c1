"""Line-delimited JSON formats for datasets, knowledge bases, augmentations,
and predictions.

Every format is UTF-8, one record per line. Saves are canonical: schema
fields first in a fixed order, unknown fields after in sorted order, so
save(load(f)) of a canonical file is byte-identical and unknown fields
survive round trips.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any, Iterable

from .core import (
    Dataset,
    Entity,
    KnowledgeBase,
    MentionContext,
    MentionKey,
    PipelineError,
    validate_dataset,
)
from .linker import RankedPrediction

if TYPE_CHECKING:
    from .gateway import GenerationParams


class MalformedLine(PipelineError):
    def __init__(self, line_no: int, content: str, reason: str):
        super().__init__(f"line {line_no}: {reason}: {content[:120]!r}")
        self.line_no = line_no
        self.content = content
        self.reason = reason


class SpanMismatch(PipelineError):
    def __init__(self, doc_id: str, detail: str = ""):
        super().__init__(f"span/surface mismatch in doc {doc_id!r}" + (f": {detail}" if detail else ""))
        self.doc_id = doc_id


class DuplicateEntityId(PipelineError):
    def __init__(self, entity_id: str):
        super().__init__(f"duplicate entity id {entity_id!r}")
        self.entity_id = entity_id


DATASET_FIELDS = ("doc_id", "context", "start", "length", "surface", "gold_entity_id")
KB_FIELDS = ("id", "title", "aliases", "description", "url", "pagerank")
AUGMENTATION_FIELDS = ("doc_id", "start", "length", "provider", "description")
PREDICTION_FIELDS = ("doc_id", "start", "length", "system", "candidates", "no_prediction")


def _dump_line(known: dict[str, Any], extra: dict[str, Any]) -> str:
    record = dict(known)
    for key in sorted(extra):
        record[key] = extra[key]
    return json.dumps(record, ensure_ascii=False)


def _iter_records(path: Path) -> Iterable[tuple[int, dict[str, Any], str]]:
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise MalformedLine(line_no, stripped, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise MalformedLine(line_no, stripped, "record must be a JSON object")
            yield line_no, obj, stripped


def _require(obj: dict, key: str, types, line_no: int, content: str):
    if key not in obj:
        raise MalformedLine(line_no, content, f"missing field {key!r}")
    value = obj[key]
    if isinstance(value, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
        raise MalformedLine(line_no, content, f"field {key!r} has wrong type")
    if not isinstance(value, types):
        raise MalformedLine(line_no, content, f"field {key!r} has wrong type")
    return value


# -- datasets ---------------------------------------------------------------


def load_dataset(path: str | Path, name: str | None = None) -> Dataset:
    """Load a normalized dataset file; the result passes validate_dataset."""
    path = Path(path)
    records: list[MentionContext] = []
    seen: set[MentionKey] = set()
    for line_no, obj, content in _iter_records(path):
        record = MentionContext(
            doc_id=_require(obj, "doc_id", str, line_no, content),
            context=_require(obj, "context", str, line_no, content),
            start=_require(obj, "start", int, line_no, content),
            length=_require(obj, "length", int, line_no, content),
            surface=_require(obj, "surface", str, line_no, content),
            gold_entity_id=_require(obj, "gold_entity_id", str, line_no, content),
            extra={k: v for k, v in obj.items() if k not in DATASET_FIELDS},
        )
        if record.key in seen:
            raise MalformedLine(line_no, content, f"duplicate mention key {record.key}")
        seen.add(record.key)
        records.append(record)
    dataset = Dataset(name or path.stem, tuple(records))
    report = validate_dataset(dataset)
    if not report.ok:
        worst = report.violations[0]
        raise SpanMismatch(worst.doc_id, f"{worst.kind} at ({worst.start}, {worst.length})")
    return dataset


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for r in dataset.records:
            known = {
                "doc_id": r.doc_id,
                "context": r.context,
                "start": r.start,
                "length": r.length,
                "surface": r.surface,
                "gold_entity_id": r.gold_entity_id,
            }
            handle.write(_dump_line(known, r.extra) + "\n")


# -- knowledge base ---------------------------------------------------------


def load_kb(path: str | Path) -> KnowledgeBase:
    """Load entity records and build the alias index (titles included)."""
    entities: dict[str, Entity] = {}
    for line_no, obj, content in _iter_records(Path(path)):
        entity_id = _require(obj, "id", str, line_no, content)
        if entity_id in entities:
            raise DuplicateEntityId(entity_id)
        aliases = obj.get("aliases", [])
        if not isinstance(aliases, list) or not all(isinstance(a, str) for a in aliases):
            raise MalformedLine(line_no, content, "field 'aliases' must be a list of strings")
        url = obj.get("url")
        if url is not None and not isinstance(url, str):
            raise MalformedLine(line_no, content, "field 'url' must be a string or null")
        pagerank = obj.get("pagerank")
        if pagerank is not None and (isinstance(pagerank, bool) or not isinstance(pagerank, (int, float))):
            raise MalformedLine(line_no, content, "field 'pagerank' must be a number or null")
        try:
            entities[entity_id] = Entity(
                id=entity_id,
                title=_require(obj, "title", str, line_no, content),
                aliases=tuple(aliases),
                description=obj.get("description", "") or "",
                url=url,
                pagerank=float(pagerank) if pagerank is not None else None,
                extra={k: v for k, v in obj.items() if k not in KB_FIELDS},
            )
        except ValueError as exc:
            raise MalformedLine(line_no, content, str(exc)) from exc
    return KnowledgeBase(entities.values())


def save_kb(kb: KnowledgeBase, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for entity in kb.entities.values():
            known = {
                "id": entity.id,
                "title": entity.title,
                "aliases": list(entity.aliases),
                "description": entity.description,
                "url": entity.url,
                "pagerank": entity.pagerank,
            }
            handle.write(_dump_line(known, entity.extra) + "\n")


# -- augmentations ----------------------------------------------------------


@dataclass(frozen=True)
class AugmentationRecord:
    """One LLM-generated mention-centered description."""

    doc_id: str
    start: int
    length: int
    provider: str
    description: str
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def key(self) -> MentionKey:
        return (self.doc_id, self.start, self.length)


@dataclass
class AugmentationSet:
    """Descriptions keyed by mention, plus the provider that generated them.

    ``params`` records the generation settings when the set was produced in
    process; sets loaded from disk carry ``params=None``.
    """

    provider: str
    records: dict[MentionKey, AugmentationRecord] = field(default_factory=dict)
    params: "GenerationParams | None" = None


def load_augmentations(path: str | Path) -> AugmentationSet:
    records: dict[MentionKey, AugmentationRecord] = {}
    providers: set[str] = set()
    for line_no, obj, content in _iter_records(Path(path)):
        record = AugmentationRecord(
            doc_id=_require(obj, "doc_id", str, line_no, content),
            start=_require(obj, "start", int, line_no, content),
            length=_require(obj, "length", int, line_no, content),
            provider=_require(obj, "provider", str, line_no, content),
            description=_require(obj, "description", str, line_no, content),
            extra={k: v for k, v in obj.items() if k not in AUGMENTATION_FIELDS},
        )
        if not record.description:
            raise MalformedLine(line_no, content, "description must be nonempty")
        if record.key in records:
            raise MalformedLine(line_no, content, f"duplicate augmentation key {record.key}")
        records[record.key] = record
        providers.add(record.provider)
    provider = providers.pop() if len(providers) == 1 else "+".join(sorted(providers))
    return AugmentationSet(provider=provider, records=records)


def save_augmentations(aug: AugmentationSet, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in aug.records.values():
            known = {
                "doc_id": record.doc_id,
                "start": record.start,
                "length": record.length,
                "provider": record.provider,
                "description": record.description,
            }
            handle.write(_dump_line(known, record.extra) + "\n")


# -- predictions ------------------------------------------------------------


@dataclass
class PredictionSet:
    """Ranked predictions from one system, keyed by mention.

    ``extras`` carries unknown per-record fields through load/save round
    trips.
    """

    system: str
    records: dict[MentionKey, RankedPrediction] = field(default_factory=dict)
    extras: dict[MentionKey, dict[str, Any]] = field(default_factory=dict)


def load_predictions(path: str | Path) -> PredictionSet:
    records: dict[MentionKey, RankedPrediction] = {}
    extras: dict[MentionKey, dict[str, Any]] = {}
    systems: set[str] = set()
    for line_no, obj, content in _iter_records(Path(path)):
        key = (
            _require(obj, "doc_id", str, line_no, content),
            _require(obj, "start", int, line_no, content),
            _require(obj, "length", int, line_no, content),
        )
        systems.add(_require(obj, "system", str, line_no, content))
        raw = _require(obj, "candidates", list, line_no, content)
        no_prediction = obj.get("no_prediction", not raw)
        if not isinstance(no_prediction, bool):
            raise MalformedLine(line_no, content, "field 'no_prediction' must be a boolean")
        candidates = []
        for item in raw:
            if (
                not isinstance(item, dict)
                or not isinstance(item.get("entity_id"), str)
                or isinstance(item.get("prob"), bool)
                or not isinstance(item.get("prob"), (int, float))
            ):
                raise MalformedLine(line_no, content, "candidates must be {entity_id, prob} objects")
            candidates.append((item["entity_id"], float(item["prob"])))
        prediction = RankedPrediction(tuple(candidates), no_prediction=no_prediction)
        try:
            prediction.validate()
        except ValueError as exc:
            raise MalformedLine(line_no, content, str(exc)) from exc
        if key in records:
            raise MalformedLine(line_no, content, f"duplicate prediction key {key}")
        records[key] = prediction
        unknown = {k: v for k, v in obj.items() if k not in PREDICTION_FIELDS}
        if unknown:
            extras[key] = unknown
    system = systems.pop() if len(systems) == 1 else "+".join(sorted(systems))
    return PredictionSet(system=system, records=records, extras=extras)


def save_predictions(preds: PredictionSet, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for key, prediction in preds.records.items():
            known = {
                "doc_id": key[0],
                "start": key[1],
                "length": key[2],
                "system": preds.system,
                "candidates": [
                    {"entity_id": eid, "prob": prob} for eid, prob in prediction.candidates
                ],
                "no_prediction": prediction.no_prediction,
            }
            handle.write(_dump_line(known, preds.extras.get(key, {})) + "\n")


# -- alignment --------------------------------------------------------------


@dataclass(frozen=True)
class AlignmentReport:
    """Agreement between a dataset and an augmentation set.

    matched + missing == len(dataset) and matched + orphans == len(aug).
    """

    matched: int
    missing: tuple[MentionKey, ...]
    orphans: tuple[MentionKey, ...]

    @property
    def complete(self) -> bool:
        return not self.missing


def align(dataset: Dataset, aug: AugmentationSet) -> AlignmentReport:
    """Report mentions without an augmentation and augmentations without a mention."""
    dataset_keys = {r.key for r in dataset.records}
    aug_keys = set(aug.records)
    return AlignmentReport(
        matched=len(dataset_keys & aug_keys),
        missing=tuple(sorted(dataset_keys - aug_keys)),
        orphans=tuple(sorted(aug_keys - dataset_keys)),
    )
