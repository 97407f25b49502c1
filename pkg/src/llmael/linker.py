"""Linking backends: the backend contract, a deterministic token-overlap
baseline over a local knowledge base, and a wire client for remote models.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Protocol

import requests

from .core import Entity, KnowledgeBase, PipelineError, normalize
from .fusion import FusedContext

EPSILON = 1e-6
PROB_SUM_TOLERANCE = 1e-6
DEFAULT_TOP_K = 10

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


class BackendUnavailable(PipelineError):
    pass


class ProtocolViolation(PipelineError):
    pass


@dataclass(frozen=True)
class RankedPrediction:
    """Ordered candidate list with normalized probabilities.

    Probabilities are non-increasing and sum to one within tolerance;
    ``no_prediction`` implies an empty candidate list.
    """

    candidates: tuple[tuple[str, float], ...] = ()
    no_prediction: bool = False

    @property
    def top1(self) -> tuple[str, float] | None:
        return self.candidates[0] if self.candidates else None

    def validate(self) -> None:
        if self.no_prediction:
            if self.candidates:
                raise ValueError("no_prediction prediction must have no candidates")
            return
        if not self.candidates:
            raise ValueError("prediction needs candidates or the no_prediction marker")
        ids = [c[0] for c in self.candidates]
        if len(set(ids)) != len(ids):
            raise ValueError("candidates must be distinct")
        probs = [c[1] for c in self.candidates]
        if any(p < 0 or p > 1 for p in probs):
            raise ValueError("probabilities must lie in [0, 1]")
        if any(probs[i] < probs[i + 1] for i in range(len(probs) - 1)):
            raise ValueError("probabilities must be non-increasing")
        if abs(math.fsum(probs) - 1.0) > PROB_SUM_TOLERANCE:
            raise ValueError(f"probabilities sum to {math.fsum(probs)}, not 1")


NO_PREDICTION = RankedPrediction(no_prediction=True)


class LinkerBackend(Protocol):
    """Behavioral contract every linking backend satisfies."""

    name: str

    def link(self, fc: FusedContext, top_k: int = DEFAULT_TOP_K) -> RankedPrediction: ...


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumeric, drop tokens shorter than 2."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= 2]


def baseline_candidates(kb: KnowledgeBase, surface: str) -> list[Entity]:
    """Entities whose normalized alias set contains the surface, by id."""
    return kb.lookup(normalize(surface))


def _jaccard(a: set[str], b: set[str]) -> float:
    union = len(a | b)
    if union == 0:
        return 0.0
    return len(a & b) / union


def baseline_link(
    kb: KnowledgeBase, fc: FusedContext, top_k: int = DEFAULT_TOP_K
) -> RankedPrediction:
    """Score alias-matched candidates by context/description token overlap.

    The surface's own tokens are excluded from the context token set so the
    mention string never rewards candidates merely for sharing the alias.
    Smoothing by ``EPSILON`` keeps the output a valid distribution even when
    every overlap is zero; probabilities are renormalized over the kept
    top-k so the simplex invariant always holds.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    candidates = baseline_candidates(kb, fc.surface)
    if not candidates:
        return NO_PREDICTION
    context_tokens = set(tokenize(fc.text)) - set(tokenize(fc.surface))
    scored = sorted(
        ((e, _jaccard(context_tokens, set(tokenize(e.description)))) for e in candidates),
        key=lambda pair: (-pair[1], pair[0].id),
    )[:top_k]
    total = math.fsum(score + EPSILON for _, score in scored)
    return RankedPrediction(
        tuple((e.id, (score + EPSILON) / total) for e, score in scored)
    )


@dataclass
class BaselineBackend:
    """LinkerBackend adapter around :func:`baseline_link`."""

    kb: KnowledgeBase
    name: str = "baseline"

    def link(self, fc: FusedContext, top_k: int = DEFAULT_TOP_K) -> RankedPrediction:
        return baseline_link(self.kb, fc, top_k)


def validate_link_response(payload: Any, top_k: int | None = None) -> RankedPrediction:
    """Check a /link response body and return the normalized prediction.

    Raises ProtocolViolation on schema breakage; renormalizes probability
    sums in [0.5, 2] and re-sorts candidates into non-increasing order.
    Shared by the remote client and by adapter conformance tests.
    """
    if not isinstance(payload, dict):
        raise ProtocolViolation(f"response body must be an object, got {type(payload).__name__}")
    for key in ("backend", "candidates", "no_prediction"):
        if key not in payload:
            raise ProtocolViolation(f"response missing field {key!r}")
    if not isinstance(payload["backend"], str):
        raise ProtocolViolation("backend must be a string")
    if not isinstance(payload["no_prediction"], bool):
        raise ProtocolViolation("no_prediction must be a boolean")
    raw = payload["candidates"]
    if not isinstance(raw, list):
        raise ProtocolViolation("candidates must be a list")
    if payload["no_prediction"]:
        if raw:
            raise ProtocolViolation("no_prediction response must carry no candidates")
        return NO_PREDICTION
    if not raw:
        raise ProtocolViolation("response needs candidates or the no_prediction marker")

    pairs: list[tuple[str, float]] = []
    for item in raw:
        if not isinstance(item, dict):
            raise ProtocolViolation("candidate entries must be objects")
        entity_id = item.get("entity_id")
        prob = item.get("prob")
        if not isinstance(entity_id, str) or not entity_id:
            raise ProtocolViolation("candidate entity_id must be a nonempty string")
        if isinstance(prob, bool) or not isinstance(prob, (int, float)):
            raise ProtocolViolation("candidate prob must be a number")
        if prob < 0:
            raise ProtocolViolation(f"negative probability {prob}")
        pairs.append((entity_id, float(prob)))
    if len({eid for eid, _ in pairs}) != len(pairs):
        raise ProtocolViolation("duplicate candidate entity ids")

    total = math.fsum(p for _, p in pairs)
    if not 0.5 <= total <= 2.0:
        raise ProtocolViolation(f"probability sum {total} outside renormalization window")
    pairs = [(eid, p / total) for eid, p in pairs]
    pairs.sort(key=lambda pair: (-pair[1], pair[0]))
    if top_k is not None and len(pairs) > top_k:
        pairs = pairs[:top_k]
        kept = math.fsum(p for _, p in pairs)
        pairs = [(eid, p / kept) for eid, p in pairs]
    return RankedPrediction(tuple(pairs))


@dataclass
class RemoteBackend:
    """Client for the /link wire protocol served by a model adapter."""

    endpoint: str
    name: str = "remote"
    timeout: float = 30.0
    session: requests.Session = field(default_factory=requests.Session, repr=False)

    def health(self) -> dict[str, Any]:
        try:
            response = self.session.get(f"{self.endpoint.rstrip('/')}/health", timeout=self.timeout)
        except requests.RequestException as exc:
            raise BackendUnavailable(str(exc)) from exc
        if response.status_code != 200:
            raise BackendUnavailable(f"health returned {response.status_code}")
        return response.json()

    def link(self, fc: FusedContext, top_k: int = DEFAULT_TOP_K) -> RankedPrediction:
        prediction, backend_name = remote_link(
            self.endpoint, fc, top_k, session=self.session, timeout=self.timeout
        )
        self.name = backend_name
        return prediction


def link_all(
    backend: LinkerBackend,
    contexts: Iterable[FusedContext],
    top_k: int = DEFAULT_TOP_K,
    concurrency: int = 1,
) -> list[RankedPrediction]:
    """Link a batch with up to ``concurrency`` in-flight requests.

    Results are assembled in input order regardless of completion order, so
    output is deterministic for any concurrency level.
    """
    items = list(contexts)
    if concurrency <= 1 or len(items) <= 1:
        return [backend.link(fc, top_k) for fc in items]
    with ThreadPoolExecutor(max_workers=concurrency) as pool:
        return list(pool.map(lambda fc: backend.link(fc, top_k), items))


def remote_link(
    endpoint: str,
    fc: FusedContext,
    top_k: int = DEFAULT_TOP_K,
    session: requests.Session | None = None,
    timeout: float = 30.0,
) -> tuple[RankedPrediction, str]:
    """POST one linking request; return the validated prediction and the
    backend name reported by the response."""
    http = session or requests
    body = {"context": fc.text, "start": fc.start, "length": fc.length, "top_k": top_k}
    try:
        response = http.post(f"{endpoint.rstrip('/')}/link", json=body, timeout=timeout)
    except requests.RequestException as exc:
        raise BackendUnavailable(str(exc)) from exc
    if response.status_code >= 500:
        raise BackendUnavailable(f"backend returned {response.status_code}")
    if response.status_code != 200:
        raise ProtocolViolation(f"backend returned {response.status_code}: {response.text[:200]}")
    try:
        payload = response.json()
    except ValueError as exc:
        raise ProtocolViolation(f"malformed response body: {exc}") from exc
    prediction = validate_link_response(payload, top_k=top_k)
    return prediction, payload["backend"]
