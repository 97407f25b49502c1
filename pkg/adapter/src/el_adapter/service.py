"""FastAPI service exposing a wrapped linking model on the wire protocol.

POST /link  {"context": str, "start": int, "length": int, "top_k": int}
         -> {"backend": str, "candidates": [{entity_id, title, prob}], "no_prediction": bool}
GET /health -> 200 {"status": "ok", "backend": str} once the model is loaded,
               503 {"status": "loading"} before that.

Request bodies are validated by hand: schema problems answer 400, spans
outside the context answer 422.
"""

from __future__ import annotations

import json
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .config import AdapterConfig
from .models import IdMapper, Model, load_model, to_probabilities

MAX_TOP_K = 100


class ModelHolder:
    """Owns the model lifecycle so /health can report warm-up state."""

    def __init__(self, config: AdapterConfig):
        self.config = config
        self.model: Model | None = None
        self.mapper: IdMapper | None = None

    @property
    def ready(self) -> bool:
        return self.model is not None

    def load(self) -> None:
        model = load_model(self.config)
        self.mapper = IdMapper.from_config(self.config, model)
        self.model = model

    def link(self, context: str, start: int, length: int, top_k: int) -> dict:
        assert self.model is not None and self.mapper is not None
        scored = self.model.predict(context, start, length, top_k)
        kept = []
        for candidate in scored:
            entity_id = self.mapper.resolve(candidate.internal_id)
            if entity_id is not None:
                kept.append((entity_id, candidate))
        if not kept or all(c.score <= 0 for _, c in kept):
            return {"backend": self.model.name, "candidates": [], "no_prediction": True}
        probs = to_probabilities([c for _, c in kept], self.config.score_mode)
        return {
            "backend": self.model.name,
            "candidates": [
                {"entity_id": entity_id, "title": candidate.title, "prob": prob}
                for (entity_id, candidate), prob in zip(kept, probs)
            ],
            "no_prediction": False,
        }


def _bad_request(detail: str) -> JSONResponse:
    return JSONResponse(status_code=400, content={"detail": detail})


def _parse_link_body(body: dict) -> tuple[str, int, int, int] | JSONResponse:
    if not isinstance(body, dict):
        return _bad_request("request body must be a JSON object")
    for key, kind in (("context", str), ("start", int), ("length", int)):
        if key not in body:
            return _bad_request(f"missing field {key!r}")
        if isinstance(body[key], bool) or not isinstance(body[key], kind):
            return _bad_request(f"field {key!r} has wrong type")
    top_k = body.get("top_k", 10)
    if isinstance(top_k, bool) or not isinstance(top_k, int) or not 1 <= top_k <= MAX_TOP_K:
        return _bad_request(f"top_k must be an integer in 1..{MAX_TOP_K}")
    return body["context"], body["start"], body["length"], top_k


def create_app(config: AdapterConfig, preload: bool = True) -> FastAPI:
    holder = ModelHolder(config)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if not holder.ready:
            holder.load()
        yield

    app = FastAPI(lifespan=lifespan)
    app.state.holder = holder
    if preload:
        holder.load()

    @app.get("/health")
    async def health():
        if not holder.ready:
            return JSONResponse(status_code=503, content={"status": "loading"})
        return {"status": "ok", "backend": holder.model.name}

    @app.post("/link")
    async def link(request: Request):
        if not holder.ready:
            return JSONResponse(status_code=503, content={"detail": "model is loading"})
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError:
            return _bad_request("request body is not valid JSON")
        parsed = _parse_link_body(body)
        if isinstance(parsed, JSONResponse):
            return parsed
        context, start, length, top_k = parsed
        if start < 0 or length < 1 or start + length > len(context):
            return JSONResponse(
                status_code=422,
                content={"detail": f"span ({start}, {length}) exceeds context bounds"},
            )
        return holder.link(context, start, length, top_k)

    return app
