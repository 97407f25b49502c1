from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from llmael.core import (
    Dataset,
    Entity,
    KnowledgeBase,
    MentionContext,
    normalize,
    validate_dataset,
)


def make_record(**overrides) -> MentionContext:
    fields = dict(
        doc_id="d1",
        context="He visited Paris.",
        start=11,
        length=5,
        surface="Paris",
        gold_entity_id="paris-france",
    )
    fields.update(overrides)
    return MentionContext(**fields)


class TestValidateDataset:
    def test_valid_record_yields_empty_report(self):
        report = validate_dataset(Dataset("d", (make_record(),)))
        assert report.ok
        assert len(report) == 0

    def test_surface_mismatch(self):
        report = validate_dataset(Dataset("d", (make_record(surface="Parris"),)))
        assert len(report) == 1
        violation = report.violations[0]
        assert violation.kind == "span_surface_mismatch"
        assert violation.doc_id == "d1"

    def test_span_out_of_bounds(self):
        report = validate_dataset(Dataset("d", (make_record(start=25),)))
        assert len(report) == 1
        assert report.violations[0].kind == "span_out_of_bounds"

    def test_empty_surface(self):
        report = validate_dataset(Dataset("d", (make_record(surface="", length=0),)))
        kinds = {v.kind for v in report.violations}
        assert "empty_surface" in kinds

    def test_duplicate_key(self):
        record = make_record()
        report = validate_dataset(Dataset("d", (record, make_record())))
        assert any(v.kind == "duplicate_key" for v in report.violations)

    def test_pure(self, tiny_dataset):
        assert validate_dataset(tiny_dataset) == validate_dataset(tiny_dataset)

    @given(
        context=st.text(min_size=1, max_size=50),
        start=st.integers(min_value=0, max_value=49),
        length=st.integers(min_value=1, max_value=20),
    )
    def test_valid_slices_reproduce_surface(self, context, start, length):
        if start + length > len(context):
            return
        surface = context[start : start + length]
        record = make_record(context=context, start=start, length=length, surface=surface)
        report = validate_dataset(Dataset("d", (record,)))
        assert report.ok
        assert record.slice() == surface


class TestNormalize:
    def test_case_and_whitespace(self):
        assert normalize("  PARIS ") == normalize("paris") == "paris"

    def test_internal_whitespace_collapsed(self):
        assert normalize("New\t  York") == "new york"

    @given(st.text(max_size=80))
    def test_idempotent(self, s):
        assert normalize(normalize(s)) == normalize(s)


class TestEntity:
    def test_rejects_empty_id(self):
        with pytest.raises(ValueError):
            Entity(id="", title="Paris")

    def test_rejects_empty_title(self):
        with pytest.raises(ValueError):
            Entity(id="q90", title="")

    def test_rejects_nonpositive_pagerank(self):
        with pytest.raises(ValueError):
            Entity(id="q90", title="Paris", pagerank=0.0)


class TestKnowledgeBase:
    def test_titles_indexed_as_aliases(self, tiny_kb):
        assert [e.id for e in tiny_kb.lookup("zanzibar")] == ["zanzibar"]

    def test_shared_alias_sorted_by_id(self, tiny_kb):
        assert [e.id for e in tiny_kb.lookup("Paris")] == ["paris-france", "paris-texas"]

    def test_lookup_normalizes(self, tiny_kb):
        assert tiny_kb.lookup("  PARIS ") == tiny_kb.lookup("paris")

    def test_alias_targets_exist(self, tiny_kb):
        for ids in tiny_kb.alias_index.values():
            for entity_id in ids:
                assert entity_id in tiny_kb.entities

    def test_duplicate_id_rejected(self):
        with pytest.raises(ValueError):
            KnowledgeBase([Entity(id="x", title="A"), Entity(id="x", title="B")])
