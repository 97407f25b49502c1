from __future__ import annotations

import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from el_adapter.config import AdapterConfig, AdapterConfigError, load_adapter_config
from el_adapter.models import IdMapper, LexiconModel, ScoredCandidate, to_probabilities
from el_adapter.service import create_app

DEMO_CONFIG = Path(__file__).resolve().parent.parent / "demo" / "config.yaml"

LINK_BODY = {
    "context": "He visited Paris last week.\nParis is the capital of France.",
    "start": 11,
    "length": 5,
    "top_k": 3,
}


class TestHealth:
    def test_503_while_loading_then_ok(self, demo_config):
        app = create_app(demo_config, preload=False)
        bare = TestClient(app)  # no lifespan: model not loaded yet
        assert bare.get("/health").status_code == 503
        assert bare.get("/health").json() == {"status": "loading"}
        with TestClient(app) as started:  # lifespan loads the model
            response = started.get("/health")
            assert response.status_code == 200
            assert response.json() == {"status": "ok", "backend": "demo"}

    def test_link_503_while_loading(self, demo_config):
        bare = TestClient(create_app(demo_config, preload=False))
        assert bare.post("/link", json=LINK_BODY).status_code == 503


class TestLink:
    def test_valid_request(self, client):
        response = client.post("/link", json=LINK_BODY)
        assert response.status_code == 200
        body = response.json()
        assert body["backend"] == "demo"
        assert not body["no_prediction"]
        assert body["candidates"][0]["entity_id"] == "paris-france"
        probs = [c["prob"] for c in body["candidates"]]
        assert all(probs[i] >= probs[i + 1] for i in range(len(probs) - 1))
        assert sum(probs) == pytest.approx(1.0, abs=1e-9)

    def test_deterministic(self, client):
        first = client.post("/link", json=LINK_BODY).content
        second = client.post("/link", json=LINK_BODY).content
        assert first == second

    def test_no_prediction_when_nothing_matches(self, client):
        body = dict(LINK_BODY, context="Zorp blick quandle.", start=0, length=4)
        response = client.post("/link", json=body)
        assert response.status_code == 200
        assert response.json() == {"backend": "demo", "candidates": [], "no_prediction": True}

    def test_top_k_limits_candidates(self, client):
        body = dict(LINK_BODY, top_k=1)
        assert len(client.post("/link", json=body).json()["candidates"]) == 1

    @pytest.mark.parametrize(
        "mutation",
        [
            {"start": "11"},
            {"context": 5},
            {"length": None},
            {"top_k": 0},
            {"top_k": 101},
            {"context": None},
        ],
    )
    def test_schema_violations_return_400(self, client, mutation):
        body = dict(LINK_BODY)
        body.update(mutation)
        assert client.post("/link", json=body).status_code == 400

    def test_missing_field_returns_400(self, client):
        body = dict(LINK_BODY)
        del body["context"]
        assert client.post("/link", json=body).status_code == 400

    def test_invalid_json_returns_400(self, client):
        response = client.post("/link", content=b"{nope", headers={"Content-Type": "application/json"})
        assert response.status_code == 400

    @pytest.mark.parametrize(
        "start,length",
        [(999, 5), (-1, 5), (0, 0), (58, 5)],
    )
    def test_out_of_bounds_span_returns_422(self, client, start, length):
        body = dict(LINK_BODY, start=start, length=length)
        assert client.post("/link", json=body).status_code == 422


class TestModels:
    def test_lexicon_scores_by_overlap(self):
        model = LexiconModel("demo", [
            {"internal_id": "a", "title": "A", "text": "capital france"},
            {"internal_id": "b", "title": "B", "text": "texas county"},
        ])
        scored = model.predict("Paris is the capital of France.", 0, 5, 10)
        assert scored[0].internal_id == "a"
        assert scored[0].score == 2.0
        assert scored[1].score == 0.0

    def test_softmax_probabilities(self):
        probs = to_probabilities(
            [ScoredCandidate("a", "A", 2.0), ScoredCandidate("b", "B", 0.0)], "softmax"
        )
        assert probs[0] > probs[1]
        assert sum(probs) == pytest.approx(1.0)

    def test_passthrough_renormalizes(self):
        probs = to_probabilities(
            [ScoredCandidate("a", "A", 0.6), ScoredCandidate("b", "B", 0.2)], "passthrough"
        )
        assert probs == [pytest.approx(0.75), pytest.approx(0.25)]

    def test_mapping_must_be_total_without_nil_fallback(self, tmp_path):
        config = load_adapter_config(DEMO_CONFIG)
        partial = tmp_path / "partial.json"
        partial.write_text(json.dumps({"m001": "paris-france"}))
        broken = AdapterConfig(
            model_name="demo",
            mapping_file=partial,
            lexicon=config.lexicon,
        )
        with pytest.raises(AdapterConfigError):
            create_app(broken)

    def test_nil_fallback_drops_unmapped(self, tmp_path):
        config = load_adapter_config(DEMO_CONFIG)
        partial = tmp_path / "partial.json"
        partial.write_text(json.dumps({"m001": "paris-france"}))
        app = create_app(
            AdapterConfig(
                model_name="demo",
                mapping_file=partial,
                lexicon=config.lexicon,
                nil_fallback=True,
            )
        )
        body = TestClient(app).post("/link", json=LINK_BODY).json()
        assert [c["entity_id"] for c in body["candidates"]] == ["paris-france"]

    def test_unknown_model_rejected(self, tmp_path):
        mapping = tmp_path / "m.json"
        mapping.write_text("{}")
        with pytest.raises(AdapterConfigError):
            create_app(AdapterConfig(model_name="some-neural-linker", mapping_file=mapping))

    def test_mapper_resolve_strict(self):
        mapper = IdMapper({"a": "x"}, nil_fallback=False)
        assert mapper.resolve("a") == "x"
        with pytest.raises(AdapterConfigError):
            mapper.resolve("b")
