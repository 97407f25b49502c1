"""Shared domain types: entities, mentions, datasets, and the knowledge base.

All types are immutable after construction and safe to share across threads.
Offsets are Unicode code-point offsets, never bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator

# Reserved gold id for mentions with no knowledge-base entity.
NIL_ID = "@@NIL@@"

MentionKey = tuple[str, int, int]


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


def normalize(surface: str) -> str:
    """Normalize a surface form for alias lookup.

    Lowercase, trim, collapse internal whitespace. Idempotent and locale-free.
    """
    return " ".join(surface.split()).lower()


@dataclass(frozen=True)
class Entity:
    """One knowledge-base entry.

    ``pagerank`` holds the real-world frequency proxy used by the long-tail
    analysis; it must be strictly positive when present.
    """

    id: str
    title: str
    aliases: tuple[str, ...] = ()
    description: str = ""
    url: str | None = None
    pagerank: float | None = None
    extra: dict[str, Any] = field(default_factory=dict, compare=True)

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("entity id must be nonempty")
        if not self.title:
            raise ValueError(f"entity {self.id!r}: title must be nonempty")
        if self.pagerank is not None and not self.pagerank > 0:
            raise ValueError(f"entity {self.id!r}: pagerank must be > 0")
        object.__setattr__(self, "aliases", tuple(self.aliases))


@dataclass(frozen=True)
class MentionContext:
    """One mention inside one document context.

    ``start``/``length`` are code-point offsets into ``context``; a valid
    record slices back to ``surface`` exactly. Construction does not enforce
    the invariants -- :func:`validate_dataset` reports violations instead.
    """

    doc_id: str
    context: str
    start: int
    length: int
    surface: str
    gold_entity_id: str
    extra: dict[str, Any] = field(default_factory=dict, compare=True)

    @property
    def key(self) -> MentionKey:
        return (self.doc_id, self.start, self.length)

    @property
    def is_nil(self) -> bool:
        return self.gold_entity_id == NIL_ID

    def slice(self) -> str:
        return self.context[self.start : self.start + self.length]


@dataclass(frozen=True)
class Dataset:
    """Named, ordered collection of mentions."""

    name: str
    records: tuple[MentionContext, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[MentionContext]:
        return iter(self.records)

    def by_key(self) -> dict[MentionKey, MentionContext]:
        return {r.key: r for r in self.records}


@dataclass(frozen=True)
class Violation:
    kind: str
    doc_id: str
    start: int
    length: int
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __len__(self) -> int:
        return len(self.violations)


def validate_dataset(dataset: Dataset) -> ValidationReport:
    """Check every record against the mention invariants.

    Pure: identical input yields an identical report. Violation kinds:
    ``empty_surface``, ``span_out_of_bounds``, ``span_surface_mismatch``
    (slice differs from the stored surface), and ``duplicate_key`` for a
    repeated (doc_id, start, length) triple.
    """
    violations: list[Violation] = []
    seen: set[MentionKey] = set()
    for record in dataset.records:
        if not record.surface:
            violations.append(
                Violation("empty_surface", record.doc_id, record.start, record.length)
            )
        if (
            record.start < 0
            or record.length < 1
            or record.start + record.length > len(record.context)
        ):
            violations.append(
                Violation(
                    "span_out_of_bounds",
                    record.doc_id,
                    record.start,
                    record.length,
                    detail=f"context has {len(record.context)} characters",
                )
            )
        elif record.slice() != record.surface:
            violations.append(
                Violation(
                    "span_surface_mismatch",
                    record.doc_id,
                    record.start,
                    record.length,
                    detail=f"slice {record.slice()!r} != surface {record.surface!r}",
                )
            )
        if record.key in seen:
            violations.append(
                Violation("duplicate_key", record.doc_id, record.start, record.length)
            )
        seen.add(record.key)
    return ValidationReport(tuple(violations))


class KnowledgeBase:
    """Entity catalog with a normalized alias index.

    Titles are indexed as aliases automatically. Lookup is case-insensitive
    and whitespace-trimmed via :func:`normalize`.
    """

    def __init__(self, entities: Iterable[Entity]):
        self.entities: dict[str, Entity] = {}
        self.alias_index: dict[str, list[str]] = {}
        for entity in entities:
            if entity.id in self.entities:
                raise ValueError(f"duplicate entity id {entity.id!r}")
            self.entities[entity.id] = entity
        for entity in self.entities.values():
            for alias in (entity.title, *entity.aliases):
                key = normalize(alias)
                if not key:
                    continue
                ids = self.alias_index.setdefault(key, [])
                if entity.id not in ids:
                    ids.append(entity.id)
        for ids in self.alias_index.values():
            ids.sort()

    def __len__(self) -> int:
        return len(self.entities)

    def __contains__(self, entity_id: str) -> bool:
        return entity_id in self.entities

    def get(self, entity_id: str) -> Entity | None:
        return self.entities.get(entity_id)

    def lookup(self, surface: str) -> list[Entity]:
        """Entities whose normalized alias set contains the surface, by id."""
        return [self.entities[i] for i in self.alias_index.get(normalize(surface), [])]
