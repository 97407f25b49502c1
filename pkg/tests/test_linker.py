from __future__ import annotations

import json
import math
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from llmael.core import Entity, KnowledgeBase
from llmael.fusion import FusedContext
from llmael.linker import (
    EPSILON,
    BackendUnavailable,
    BaselineBackend,
    ProtocolViolation,
    RankedPrediction,
    baseline_candidates,
    baseline_link,
    link_all,
    remote_link,
    tokenize,
    validate_link_response,
)


def fused(text: str, surface: str, start: int | None = None) -> FusedContext:
    position = text.index(surface) if start is None else start
    return FusedContext(text, position, len(surface), surface)


class TestTokenize:
    def test_lowercase_split_and_length_filter(self):
        assert tokenize("He visited Paris, D.C.! x") == ["he", "visited", "paris"]

    def test_underscore_is_a_separator(self):
        assert tokenize("foo_bar") == ["foo", "bar"]


class TestBaselineCandidates:
    def test_shared_alias(self, tiny_kb):
        assert [e.id for e in baseline_candidates(tiny_kb, "Paris")] == [
            "paris-france",
            "paris-texas",
        ]

    def test_normalized_surface(self, tiny_kb):
        assert baseline_candidates(tiny_kb, "PARIS ") == baseline_candidates(tiny_kb, "Paris")

    def test_unknown_surface(self, tiny_kb):
        assert baseline_candidates(tiny_kb, "Atlantis") == []


class TestBaselineLink:
    def test_description_overlap_wins(self, tiny_kb):
        fc = fused("He visited Paris last week.\nParis is the capital of France.", "Paris")
        prediction = baseline_link(tiny_kb, fc)
        assert prediction.candidates[0][0] == "paris-france"
        prediction.validate()

    def test_identical_empty_descriptions_tie(self):
        kb = KnowledgeBase(
            [Entity(id="b", title="Foo"), Entity(id="a", title="Foo")]
        )
        prediction = baseline_link(kb, fused("Foo went home.", "Foo"))
        assert [c[0] for c in prediction.candidates] == ["a", "b"]
        assert prediction.candidates[0][1] == pytest.approx(0.5)
        assert prediction.candidates[1][1] == pytest.approx(0.5)

    def test_unknown_surface_is_no_prediction(self, tiny_kb):
        prediction = baseline_link(tiny_kb, fused("Atlantis sank.", "Atlantis"))
        assert prediction.no_prediction
        assert prediction.candidates == ()

    def test_pure(self, tiny_kb):
        fc = fused("Paris in Texas.", "Paris")
        assert baseline_link(tiny_kb, fc) == baseline_link(tiny_kb, fc)

    def test_top_k_truncates_and_renormalizes(self, tiny_kb):
        fc = fused("Paris has a capital of France feel.", "Paris")
        prediction = baseline_link(tiny_kb, fc, top_k=1)
        assert len(prediction.candidates) == 1
        prediction.validate()


def oracle_link(kb: KnowledgeBase, fc: FusedContext, top_k: int) -> list[tuple[str, float]]:
    """Direct enumeration of the scoring definition, kept independent of the
    implementation's sorting/normalization path."""
    context = {t for t in tokenize(fc.text) if t not in set(tokenize(fc.surface))}
    rows = []
    for entity in kb.lookup(fc.surface):
        description = set(tokenize(entity.description))
        union = context | description
        score = (len(context & description) / len(union)) if union else 0.0
        rows.append((entity.id, score))
    rows.sort(key=lambda r: (-r[1], r[0]))
    rows = rows[:top_k]
    denominator = sum(s + EPSILON for _, s in rows)
    return [(eid, (s + EPSILON) / denominator) for eid, s in rows]


words = st.sampled_from(
    ["capital", "france", "texas", "city", "river", "museum", "cowboy", "desert", "moon"]
)


@st.composite
def tiny_worlds(draw):
    n = draw(st.integers(1, 3))
    entities = []
    for i in range(n):
        description = " ".join(draw(st.lists(words, max_size=4)))
        entities.append(
            Entity(id=f"e{i}", title="Target", aliases=("Target",), description=description)
        )
    kb = KnowledgeBase(entities)
    context_words = draw(st.lists(words, max_size=6))
    text = "Target " + " ".join(context_words)
    return kb, fused(text, "Target", start=0), draw(st.integers(1, 3))


@given(tiny_worlds())
@settings(max_examples=200)
def test_matches_brute_force_oracle(world):
    kb, fc, top_k = world
    prediction = baseline_link(kb, fc, top_k)
    expected = oracle_link(kb, fc, top_k)
    assert [c[0] for c in prediction.candidates] == [e[0] for e in expected]
    for (_, got), (_, want) in zip(prediction.candidates, expected):
        assert got == pytest.approx(want, abs=1e-12)


@given(tiny_worlds(), st.sampled_from(["lighthouse", "harbor", "quarry"]))
@settings(max_examples=200)
def test_monotonicity(world, token):
    """A token appearing only in candidate X's description never lowers X's rank."""
    kb, fc, _ = world
    entities = list(kb.entities.values())
    target = entities[0]
    boosted = KnowledgeBase(
        [
            Entity(
                id=e.id,
                title=e.title,
                aliases=e.aliases,
                description=(e.description + " " + token) if e.id == target.id else e.description,
            )
            for e in entities
        ]
    )
    before = baseline_link(boosted, fc, top_k=10)
    richer = FusedContext(fc.text + " " + token, fc.start, fc.length, fc.surface)
    after = baseline_link(boosted, richer, top_k=10)
    rank_before = [c[0] for c in before.candidates].index(target.id)
    rank_after = [c[0] for c in after.candidates].index(target.id)
    assert rank_after <= rank_before


class TestValidateLinkResponse:
    def payload(self, **overrides):
        base = {
            "backend": "demo",
            "candidates": [
                {"entity_id": "a", "title": "A", "prob": 0.6},
                {"entity_id": "b", "title": "B", "prob": 0.4},
            ],
            "no_prediction": False,
        }
        base.update(overrides)
        return base

    def test_conforming_response(self):
        prediction = validate_link_response(self.payload())
        prediction.validate()
        assert [c[0] for c in prediction.candidates] == ["a", "b"]

    def test_renormalizes_within_window(self):
        payload = self.payload(
            candidates=[
                {"entity_id": "a", "title": "A", "prob": 0.6},
                {"entity_id": "b", "title": "B", "prob": 0.2},
            ]
        )
        prediction = validate_link_response(payload)
        assert math.fsum(p for _, p in prediction.candidates) == pytest.approx(1.0)
        assert prediction.candidates[0] == ("a", pytest.approx(0.75))

    def test_sum_outside_window_rejected(self):
        payload = self.payload(candidates=[{"entity_id": "a", "title": "A", "prob": 0.1}])
        with pytest.raises(ProtocolViolation):
            validate_link_response(payload)

    def test_missing_field_rejected(self):
        payload = self.payload()
        del payload["backend"]
        with pytest.raises(ProtocolViolation):
            validate_link_response(payload)

    def test_reorders_unsorted_candidates(self):
        payload = self.payload(
            candidates=[
                {"entity_id": "b", "title": "B", "prob": 0.4},
                {"entity_id": "a", "title": "A", "prob": 0.6},
            ]
        )
        prediction = validate_link_response(payload)
        assert prediction.candidates[0][0] == "a"

    def test_no_prediction_with_candidates_rejected(self):
        with pytest.raises(ProtocolViolation):
            validate_link_response(self.payload(no_prediction=True))


class _StubHandler(BaseHTTPRequestHandler):
    response_body: bytes = b"{}"
    status = 200

    def do_POST(self):
        self.rfile.read(int(self.headers.get("Content-Length", 0)))
        self.send_response(self.status)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(self.response_body)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}", _StubHandler
    server.shutdown()


class TestRemoteLink:
    def test_conforming_remote_response(self, stub_server, paris_mention):
        endpoint, handler = stub_server
        handler.status = 200
        handler.response_body = json.dumps(
            {
                "backend": "demo",
                "candidates": [
                    {"entity_id": "a", "title": "A", "prob": 0.5},
                    {"entity_id": "b", "title": "B", "prob": 0.3},
                    {"entity_id": "c", "title": "C", "prob": 0.2},
                ],
                "no_prediction": False,
            }
        ).encode()
        fc = FusedContext(
            paris_mention.context, paris_mention.start, paris_mention.length, paris_mention.surface
        )
        prediction, backend = remote_link(endpoint, fc, top_k=5)
        assert backend == "demo"
        assert len(prediction.candidates) == 3
        prediction.validate()

    def test_malformed_body(self, stub_server, paris_mention):
        endpoint, handler = stub_server
        handler.status = 200
        handler.response_body = b"not json"
        fc = FusedContext(paris_mention.context, 11, 5, "Paris")
        with pytest.raises(ProtocolViolation):
            remote_link(endpoint, fc)

    def test_unreachable_backend(self, paris_mention):
        fc = FusedContext(paris_mention.context, 11, 5, "Paris")
        with pytest.raises(BackendUnavailable):
            remote_link("http://127.0.0.1:1", fc, timeout=0.5)


class TestLinkAll:
    def test_concurrent_results_match_serial_in_order(self, tiny_kb):
        backend = BaselineBackend(tiny_kb)
        contexts = [
            fused(f"Paris sits near marker {i} of France.", "Paris") for i in range(8)
        ] + [fused("Zanzibar traded spice.", "Zanzibar")]
        serial = link_all(backend, contexts, top_k=5, concurrency=1)
        threaded = link_all(backend, contexts, top_k=5, concurrency=4)
        assert serial == threaded


class TestRankedPrediction:
    def test_simplex_enforced(self):
        with pytest.raises(ValueError):
            RankedPrediction((("a", 0.4),)).validate()
        with pytest.raises(ValueError):
            RankedPrediction((("a", 0.3), ("b", 0.7))).validate()
        with pytest.raises(ValueError):
            RankedPrediction((("a", 0.5), ("a", 0.5))).validate()
        RankedPrediction((("a", 0.5), ("b", 0.5))).validate()
        RankedPrediction(no_prediction=True).validate()
