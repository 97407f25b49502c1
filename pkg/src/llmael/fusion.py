"""Join an LLM-generated mention description with the original context.

Five strategies cover the arrangements of the two texts and the choice of
which occurrence of the mention becomes the authoritative span handed to a
linker. Joined parts are always separated by a single newline.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .core import Dataset, MentionContext, MentionKey, PipelineError


class EmptyDescription(PipelineError):
    pass


class MentionTruncated(PipelineError):
    def __init__(self, start: int, length: int, max_chars: int):
        super().__init__(
            f"mention span ({start}, {length}) does not survive truncation to {max_chars} chars"
        )
        self.start = start
        self.length = length


class MissingAugmentation(PipelineError):
    def __init__(self, key: MentionKey):
        super().__init__(f"no augmentation for mention {key}")
        self.key = key


class ContextOrder(enum.Enum):
    LLM_ONLY = "llm-only"
    LLM_THEN_ORIGINAL = "llm+original"
    ORIGINAL_THEN_LLM = "original+llm"


class OffsetSource(enum.Enum):
    LLM = "llm"
    ORIGINAL = "original"


@dataclass(frozen=True)
class JoinStrategy:
    id: int
    order: ContextOrder
    offset_source: OffsetSource


#: The five context-joining strategies, keyed by id.
STRATEGIES: dict[int, JoinStrategy] = {
    0: JoinStrategy(0, ContextOrder.LLM_ONLY, OffsetSource.LLM),
    1: JoinStrategy(1, ContextOrder.LLM_THEN_ORIGINAL, OffsetSource.LLM),
    2: JoinStrategy(2, ContextOrder.LLM_THEN_ORIGINAL, OffsetSource.ORIGINAL),
    3: JoinStrategy(3, ContextOrder.ORIGINAL_THEN_LLM, OffsetSource.LLM),
    4: JoinStrategy(4, ContextOrder.ORIGINAL_THEN_LLM, OffsetSource.ORIGINAL),
}

DEFAULT_STRATEGY_ID = 4


def strategy(strategy_id: int) -> JoinStrategy:
    try:
        return STRATEGIES[strategy_id]
    except KeyError:
        raise ValueError(f"strategy id must be in 0..4, got {strategy_id}") from None


@dataclass(frozen=True)
class FusedContext:
    """Joined text plus the single authoritative mention span.

    The slice at (start, length) equals the surface case-insensitively; it is
    an exact match whenever the offset came from the original context.
    ``strategy_id`` is -1 for unfused (pass-through) contexts.
    """

    text: str
    start: int
    length: int
    surface: str
    strategy_id: int = -1
    fallback_applied: bool = False

    def slice(self) -> str:
        return self.text[self.start : self.start + self.length]


def find_ci(haystack: str, needle: str) -> int:
    """Index of the first case-insensitive occurrence of needle, or -1.

    Comparison lowercases fixed-width windows of the haystack so the returned
    offset is valid in the original string even where lowercasing changes
    string length.
    """
    if not needle:
        return -1
    target = needle.lower()
    width = len(needle)
    for i in range(len(haystack) - width + 1):
        if haystack[i : i + width].lower() == target:
            return i
    return -1


def passthrough(mc: MentionContext) -> FusedContext:
    """Wrap an unmodified mention context for direct linking."""
    return FusedContext(mc.context, mc.start, mc.length, mc.surface)


def fuse(mc: MentionContext, description: str, s: JoinStrategy) -> FusedContext:
    """Join ``description`` with the mention's context under strategy ``s``.

    When the offset source is the LLM text but the surface does not occur in
    the description (case-insensitively), the offset falls back to the
    original span (for LLM-only, to the original context unmodified) and
    ``fallback_applied`` is set.
    """
    if not description:
        raise EmptyDescription(f"empty description for mention {mc.key}")

    llm_pos = find_ci(description, mc.surface)
    fallback = s.offset_source is OffsetSource.LLM and llm_pos < 0

    if s.order is ContextOrder.LLM_ONLY:
        if fallback:
            return FusedContext(
                mc.context, mc.start, mc.length, mc.surface, s.id, fallback_applied=True
            )
        return FusedContext(description, llm_pos, len(mc.surface), mc.surface, s.id)

    if s.order is ContextOrder.LLM_THEN_ORIGINAL:
        text = description + "\n" + mc.context
        original_start = len(description) + 1 + mc.start
        llm_start = llm_pos
    else:
        text = mc.context + "\n" + description
        original_start = mc.start
        llm_start = len(mc.context) + 1 + llm_pos

    if s.offset_source is OffsetSource.ORIGINAL or fallback:
        return FusedContext(
            text, original_start, mc.length, mc.surface, s.id, fallback_applied=fallback
        )
    return FusedContext(text, llm_start, len(mc.surface), mc.surface, s.id)


def truncate(fc: FusedContext, max_chars: int) -> FusedContext:
    """Tail-trim the fused text to ``max_chars``; offsets stay unchanged."""
    if max_chars < len(fc.surface):
        raise ValueError(f"max_chars {max_chars} shorter than surface {fc.surface!r}")
    if len(fc.text) <= max_chars:
        return fc
    if fc.start + fc.length > max_chars:
        raise MentionTruncated(fc.start, fc.length, max_chars)
    return replace(fc, text=fc.text[:max_chars])


def augment_training_set(dataset: Dataset, aug, s: JoinStrategy) -> Dataset:
    """Replace each record's context/span by its fused counterpart.

    ``aug`` is an AugmentationSet covering every mention of ``dataset``.
    Gold labels, surfaces, and record order are preserved; strategy id and
    fallback flag are recorded on each output record.
    """
    fused_records = []
    for record in dataset.records:
        aug_record = aug.records.get(record.key)
        if aug_record is None:
            raise MissingAugmentation(record.key)
        fc = fuse(record, aug_record.description, s)
        extra = dict(record.extra)
        extra["strategy_id"] = fc.strategy_id
        extra["fallback_applied"] = fc.fallback_applied
        fused_records.append(
            MentionContext(
                doc_id=record.doc_id,
                context=fc.text,
                start=fc.start,
                length=fc.length,
                surface=record.surface,
                gold_entity_id=record.gold_entity_id,
                extra=extra,
            )
        )
    return Dataset(dataset.name, tuple(fused_records))
