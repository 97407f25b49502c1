from __future__ import annotations

import csv
import io

import pytest
from hypothesis import given
from hypothesis import strategies as st

from llmael.core import Dataset, Entity, KnowledgeBase, MentionContext, NIL_ID
from llmael.evaluation import (
    EmptyDataset,
    EmptyList,
    ScoreTable,
    accuracy,
    bucket_accuracy,
    bucket_by_frequency,
    bucket_records,
    build_score_table,
    emit_report,
    macro_average,
    pagerank_exponent,
)
from llmael.io import PredictionSet
from llmael.linker import NO_PREDICTION, RankedPrediction


def mention(doc_id: str, gold: str, n: int = 0) -> MentionContext:
    context = f"Entity number {n} sits here in {doc_id}."
    return MentionContext(
        doc_id=doc_id, context=context, start=0, length=6, surface="Entity", gold_entity_id=gold
    )


def top1(entity_id: str) -> RankedPrediction:
    return RankedPrediction(((entity_id, 1.0),))


class TestAccuracy:
    def test_three_of_four(self):
        records = tuple(mention(f"d{i}", "g", i) for i in range(4))
        dataset = Dataset("d", records)
        preds = PredictionSet(
            "s",
            {
                records[0].key: top1("g"),
                records[1].key: top1("g"),
                records[2].key: top1("g"),
                records[3].key: top1("x"),
            },
        )
        assert accuracy(preds, dataset) == pytest.approx(75.0)

    def test_all_correct(self):
        records = tuple(mention(f"d{i}", "g", i) for i in range(3))
        dataset = Dataset("d", records)
        preds = PredictionSet("s", {r.key: top1("g") for r in records})
        assert accuracy(preds, dataset) == pytest.approx(100.0)

    def test_missing_prediction_counts_wrong(self):
        records = (mention("d0", "g"), mention("d1", "g"))
        preds = PredictionSet("s", {records[0].key: top1("g")})
        assert accuracy(preds, Dataset("d", records)) == pytest.approx(50.0)

    def test_no_prediction_counts_wrong(self):
        records = (mention("d0", "g"),)
        preds = PredictionSet("s", {records[0].key: NO_PREDICTION})
        assert accuracy(preds, Dataset("d", records)) == pytest.approx(0.0)

    def test_nil_excluded_by_default(self):
        records = (mention("d0", "g"), mention("d1", NIL_ID))
        preds = PredictionSet("s", {records[0].key: top1("g")})
        assert accuracy(preds, Dataset("d", records)) == pytest.approx(100.0)
        assert accuracy(preds, Dataset("d", records), include_nil=True) == pytest.approx(50.0)

    def test_empty_dataset_rejected(self):
        with pytest.raises(EmptyDataset):
            accuracy(PredictionSet("s"), Dataset("d", ()))


# Eight published result rows: six per-dataset accuracies and the printed
# average each row reported.
PUBLISHED_ROWS = [
    ("row-1", [78.37, 80.49, 73.18, 83.27, 65.34, 64.44], 74.18),
    ("row-2", [82.01, 86.23, 85.16, 86.01, 69.11, 81.11], 81.61),
    ("row-3", [87.92, 83.54, 84.32, 84.82, 68.75, 83.02], 82.06),
    ("row-4", [92.25, 87.10, 87.53, 87.75, 72.96, 85.18], 85.46),
    ("row-5", [81.94, 86.56, 85.16, 86.01, 69.17, 81.14], 81.66),
    ("row-6", [88.27, 85.67, 85.14, 85.21, 70.67, 82.95], 82.99),
    ("row-7", [92.38, 86.94, 88.09, 88.14, 73.16, 85.90], 85.76),
    ("row-8", [92.34, 88.79, 89.06, 88.14, 75.07, 86.62], 86.67),
]


class TestMacroAverage:
    @pytest.mark.parametrize("name,cells,avg", PUBLISHED_ROWS, ids=[r[0] for r in PUBLISHED_ROWS])
    def test_published_rows(self, name, cells, avg):
        assert macro_average(cells) == pytest.approx(avg, abs=0.01)

    def test_single_element(self):
        assert macro_average([90.00]) == pytest.approx(90.00)

    def test_empty_rejected(self):
        with pytest.raises(EmptyList):
            macro_average([])

    @given(st.lists(st.floats(0, 100), min_size=1, max_size=10))
    def test_bounded_by_min_max(self, scores):
        value = macro_average(scores)
        assert min(scores) - 0.005 <= value <= max(scores) + 0.005


class TestBuckets:
    def test_exact_power_boundary(self):
        assert pagerank_exponent(1e-3) == -3

    def test_interior_value(self):
        assert pagerank_exponent(3.2e-5) == -5  # log10 ~ -4.49 floors to -5

    def test_missing_pagerank_excluded(self):
        entities = [
            Entity(id="a", title="A", pagerank=1e-3),
            Entity(id="b", title="B"),
        ]
        buckets, excluded = bucket_by_frequency(entities)
        assert excluded == 1
        assert [(b.exponent, b.n_entities) for b in buckets] == [(-3, 1)]

    def test_partition(self):
        entities = [Entity(id=f"e{i}", title="E", pagerank=10.0**-e) for i, e in enumerate([3, 3, 5, 7])]
        buckets, excluded = bucket_by_frequency(entities)
        assert excluded == 0
        assert sum(b.n_entities for b in buckets) == len(entities)
        assert [b.exponent for b in buckets] == [-7, -5, -3]

    @given(
        mantissa=st.floats(1.05, 9.95),
        exponent=st.integers(-8, -1),
        shift=st.integers(-3, 3),
    )
    def test_scale_shift(self, mantissa, exponent, shift):
        p = mantissa * 10.0**exponent
        assert pagerank_exponent(p * 10.0**shift) == pagerank_exponent(p) + shift


def bucket_fixture():
    kb = KnowledgeBase(
        [
            Entity(id="low", title="Low", aliases=("Entity",), pagerank=2e-5),
            Entity(id="low2", title="Low2", aliases=("Entity",), pagerank=7e-5),
            Entity(id="high", title="High", aliases=("Entity",), pagerank=4e-3),
            Entity(id="nopr", title="NoPr", aliases=("Entity",)),
        ]
    )
    records = (
        mention("d0", "low", 0),
        mention("d1", "low", 1),
        mention("d2", "low2", 2),
        mention("d3", "high", 3),
        mention("d4", "nopr", 4),
    )
    dataset = Dataset("d", records)
    preds = PredictionSet(
        "s",
        {
            records[0].key: top1("low"),   # low: 1 of 2 correct -> 50%
            records[1].key: top1("high"),
            records[2].key: top1("x"),     # low2: 0 of 1 -> 0%
            records[3].key: top1("high"),  # high: 1 of 1 -> 100%
            records[4].key: top1("nopr"),  # excluded: no pagerank
        },
    )
    return kb, dataset, preds


class TestBucketAccuracy:
    def test_entity_then_bucket_average(self):
        kb, dataset, preds = bucket_fixture()
        buckets, excluded = bucket_accuracy([preds], [dataset], kb)
        assert excluded == 1
        by_exponent = {b.exponent: b for b in buckets}
        # bucket -5 holds low (50%) and low2 (0%): unweighted mean 25%
        assert by_exponent[-5].accuracy == pytest.approx(25.0)
        assert by_exponent[-5].n_entities == 2
        assert by_exponent[-5].n_mentions == 3
        assert by_exponent[-3].accuracy == pytest.approx(100.0)

    def test_mention_totals_balance(self):
        kb, dataset, preds = bucket_fixture()
        buckets, excluded = bucket_accuracy([preds], [dataset], kb)
        scored = sum(1 for r in dataset if not r.is_nil)
        assert sum(b.n_mentions for b in buckets) + excluded == scored

    def test_cross_dataset_pooling_order_invariant(self):
        kb, dataset, preds = bucket_fixture()
        one = bucket_accuracy([preds, preds], [dataset, dataset], kb)
        other = bucket_accuracy([preds, preds], [dataset, dataset], kb)
        assert one == other


class TestEmitReport:
    def table(self) -> ScoreTable:
        table = ScoreTable(datasets=["aida", "msnbc"])
        table.add("baseline", "aida", 92.254)
        table.add("baseline", "msnbc", 87.1)
        return table

    def test_markdown_shape(self):
        text = emit_report(self.table(), "markdown")
        lines = text.strip().splitlines()
        assert lines[0] == "| system | aida | msnbc | AVG |"
        assert lines[2] == "| baseline | 92.25 | 87.10 | 89.68 |"

    def test_csv_round_trips(self):
        text = emit_report(self.table(), "csv")
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == ["system", "aida", "msnbc", "AVG"]
        assert rows[1][0] == "baseline"

    def test_deterministic(self):
        assert emit_report(self.table(), "markdown") == emit_report(self.table(), "markdown")

    def test_bucket_report_and_records(self):
        kb, dataset, preds = bucket_fixture()
        buckets, _ = bucket_accuracy([preds], [dataset], kb)
        text = emit_report(buckets, "markdown")
        assert "bucket_exponent" in text
        records = bucket_records(buckets)
        assert records.count("\n") == len(buckets)

    def test_avg_column(self):
        table = build_score_table(
            {"s": {"d": PredictionSet("s", {("d0", 0, 6): top1("g")})}},
            {"d": Dataset("d", (mention("d0", "g"),))},
            dataset_order=["d"],
        )
        assert table.avg("s") == pytest.approx(100.0)
