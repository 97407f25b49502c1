"""LLM-augmented entity linking pipeline toolkit."""

from .core import (
    NIL_ID,
    Dataset,
    Entity,
    KnowledgeBase,
    MentionContext,
    PipelineError,
    ValidationReport,
    normalize,
    validate_dataset,
)
from .fusion import STRATEGIES, FusedContext, JoinStrategy, fuse, truncate
from .linker import RankedPrediction, baseline_link, remote_link, validate_link_response

__all__ = [
    "NIL_ID",
    "Dataset",
    "Entity",
    "KnowledgeBase",
    "MentionContext",
    "PipelineError",
    "ValidationReport",
    "normalize",
    "validate_dataset",
    "STRATEGIES",
    "FusedContext",
    "JoinStrategy",
    "fuse",
    "truncate",
    "RankedPrediction",
    "baseline_link",
    "remote_link",
    "validate_link_response",
]

__version__ = "0.1.0"
