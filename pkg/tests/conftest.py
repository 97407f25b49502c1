from __future__ import annotations

from pathlib import Path

import pytest

from llmael.core import Dataset, Entity, KnowledgeBase, MentionContext

REPO_ROOT = Path(__file__).resolve().parent.parent
TOY_DIR = REPO_ROOT / "data" / "toy"


@pytest.fixture(scope="session")
def toy_dir() -> Path:
    return TOY_DIR


@pytest.fixture
def paris_mention() -> MentionContext:
    return MentionContext(
        doc_id="d1",
        context="He visited Paris last week.",
        start=11,
        length=5,
        surface="Paris",
        gold_entity_id="paris-france",
    )


@pytest.fixture
def tiny_kb() -> KnowledgeBase:
    return KnowledgeBase(
        [
            Entity(
                id="paris-france",
                title="Paris",
                aliases=("Paris",),
                description="capital of France",
                url="https://example.org/wiki/Paris",
                pagerank=1e-3,
            ),
            Entity(
                id="paris-texas",
                title="Paris (Texas)",
                aliases=("Paris",),
                description="city in Texas",
                url="https://example.org/wiki/Paris,_Texas",
                pagerank=2e-6,
            ),
            Entity(
                id="zanzibar",
                title="Zanzibar",
                description="island off Tanzania",
                url="https://example.org/wiki/Zanzibar",
            ),
        ]
    )


@pytest.fixture
def tiny_dataset(paris_mention) -> Dataset:
    second = MentionContext(
        doc_id="d2",
        context="Paris kept a small museum.",
        start=0,
        length=5,
        surface="Paris",
        gold_entity_id="paris-texas",
    )
    third = MentionContext(
        doc_id="d3",
        context="Zanzibar lies offshore.",
        start=0,
        length=8,
        surface="Zanzibar",
        gold_entity_id="zanzibar",
    )
    return Dataset("tiny", (paris_mention, second, third))
