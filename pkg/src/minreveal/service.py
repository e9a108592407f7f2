"""HTTP API for interactive disclosure sessions.

Endpoints:
    POST /sessions                create a session from public feature values
    POST /sessions/{id}/feature   submit the requested sensitive value
    GET  /sessions/{id}           full session view (step log, status)
    POST /sessions/{id}/whatif    read-only preview of a hypothetical reveal
    GET  /health                  service and model metadata

All bodies are JSON. Feature values arrive raw and are normalized
server-side; every response echoes the normalized value used. Errors use
{code, message, field?} payloads. Sessions live in memory with idle-TTL
eviction; one mutation at a time per session (concurrent submits get a
conflict error), reads are lock-free snapshots.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .data import FeaturePartition, NormalizationSpec
from .engine import SELECTORS, Engine, EngineConfig, Session
from .gaussian import GaussianStats
from .models import LinearModel, Model

DEFAULT_TTL_SECONDS = 30 * 60


@dataclass
class ServiceBundle:
    """Immutable artifacts plus serving defaults."""

    model: Model
    stats: GaussianStats
    normalizer: NormalizationSpec
    partition: FeaturePartition
    delta: float = 0.0
    selector: str = "fscore"
    importance: np.ndarray | None = None
    mc_samples: int = 100
    probe_samples: int = 10_000
    seed: int = 0
    session_ttl: float = DEFAULT_TTL_SECONDS
    clock: callable = time.monotonic

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(self.normalizer.feature_names)

    def name_of(self, idx: int) -> str:
        return self.feature_names[idx]

    def index_of(self, name: str) -> int | None:
        try:
            return self.feature_names.index(name)
        except ValueError:
            return None


@dataclass
class SessionRecord:
    session: Session
    engine: Engine
    created: float
    last_activity: float
    delta: float
    selector: str
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """In-memory session map with idle-TTL eviction."""

    def __init__(self, ttl: float, clock):
        self._records: dict[str, SessionRecord] = {}
        self._ttl = ttl
        self._clock = clock
        self._map_lock = threading.Lock()

    def put(self, record: SessionRecord) -> str:
        session_id = uuid.uuid4().hex
        with self._map_lock:
            self._evict()
            self._records[session_id] = record
        return session_id

    def get(self, session_id: str) -> SessionRecord | None:
        with self._map_lock:
            self._evict()
            record = self._records.get(session_id)
            if record is not None:
                record.last_activity = self._clock()
            return record

    def _evict(self):
        now = self._clock()
        dead = [k for k, r in self._records.items() if now - r.last_activity > self._ttl]
        for k in dead:
            del self._records[k]


def _error(status: int, code: str, message: str, fieldname: str | None = None) -> JSONResponse:
    payload = {"code": code, "message": message}
    if fieldname is not None:
        payload["field"] = fieldname
    return JSONResponse(status_code=status, content=payload)


def create_app(bundle: ServiceBundle) -> FastAPI:
    app = FastAPI(title="minreveal disclosure service")
    store = SessionStore(bundle.session_ttl, bundle.clock)
    public_names = [bundle.name_of(i) for i in bundle.partition.public_idx]
    sensitive_names = [bundle.name_of(i) for i in bundle.partition.sensitive_idx]

    def decision_payload(session: Session) -> dict:
        t = session.terminal
        n_sensitive = len(session.partition.sensitive_idx)
        return {
            "label": t.label,
            "confidence": t.confidence,
            "features_revealed": [bundle.name_of(i) for i, _ in session.revealed],
            "leakage": (len(session.revealed) / n_sensitive) if n_sensitive else 0.0,
        }

    def status_payload(session: Session) -> dict:
        if session.terminal is not None:
            return {"status": "decided", "confidence": session.confidence, "decision": decision_payload(session)}
        return {
            "status": "awaiting_feature",
            "requested_feature": bundle.name_of(session.pending),
            "confidence": session.confidence,
            "revealed_features": [bundle.name_of(i) for i, _ in session.revealed],
        }

    async def parse_body(request: Request) -> dict | JSONResponse:
        try:
            body = await request.json()
        except Exception:
            return _error(422, "invalid_json", "request body is not valid JSON")
        if not isinstance(body, dict):
            return _error(422, "invalid_json", "request body must be a JSON object")
        return body

    @app.get("/health")
    async def health():
        return {
            "status": "ok",
            "model_family": "linear" if isinstance(bundle.model, LinearModel) else "mlp",
            "num_features": len(bundle.feature_names),
            "num_classes": bundle.model.num_classes,
            "public_features": public_names,
            "sensitive_features": sensitive_names,
            "delta": bundle.delta,
            "selector": bundle.selector,
        }

    @app.post("/sessions")
    async def create_session(request: Request):
        body = await parse_body(request)
        if isinstance(body, JSONResponse):
            return body
        delta = body.get("delta", bundle.delta)
        if not isinstance(delta, (int, float)) or not 0.0 <= float(delta) < 0.5:
            return _error(422, "invalid_delta", "delta must lie in [0, 0.5)", "delta")
        selector = body.get("selector", bundle.selector)
        if selector not in SELECTORS:
            return _error(422, "invalid_selector", f"selector must be one of {SELECTORS}", "selector")
        public = body.get("public")
        if not isinstance(public, dict):
            return _error(422, "missing_field", "body must carry a 'public' object", "public")
        for name in public:
            if bundle.index_of(name) is None:
                return _error(422, "unknown_feature", f"unknown feature {name!r}", name)
        normalized = {}
        for idx in bundle.partition.public_idx:
            name = bundle.name_of(idx)
            if name not in public:
                return _error(422, "missing_feature", f"public feature {name!r} is required", name)
            try:
                raw = float(public[name])
            except (TypeError, ValueError):
                return _error(422, "invalid_value", f"feature {name!r} must be a number", name)
            value, _ = bundle.normalizer.transform_value(idx, raw)
            normalized[name] = value

        engine = Engine(
            bundle.model, bundle.stats, bundle.partition,
            EngineConfig(
                delta=float(delta), selector=selector, mc_samples=bundle.mc_samples,
                probe_samples=bundle.probe_samples, seed=bundle.seed, importance=bundle.importance,
            ),
        )
        session = engine.begin([normalized[bundle.name_of(i)] for i in bundle.partition.public_idx])
        now = bundle.clock()
        record = SessionRecord(session, engine, now, now, float(delta), selector)
        session_id = store.put(record)
        return {
            "session_id": session_id,
            "delta": float(delta),
            "selector": selector,
            "normalized_public": normalized,
            **status_payload(session),
        }

    @app.post("/sessions/{session_id}/feature")
    async def submit_feature(session_id: str, request: Request):
        body = await parse_body(request)
        if isinstance(body, JSONResponse):
            return body
        record = store.get(session_id)
        if record is None:
            return _error(404, "not_found", "unknown or expired session")
        if not record.lock.acquire(blocking=False):
            return _error(409, "conflict", "another mutation is in flight for this session")
        try:
            session = record.session
            if session.terminal is not None:
                return _error(409, "already_decided", "session already reached a decision")
            try:
                raw = float(body.get("value"))
            except (TypeError, ValueError):
                return _error(422, "invalid_value", "'value' must be a number", "value")
            if not np.isfinite(raw):
                return _error(422, "invalid_value", "'value' must be finite", "value")
            idx = session.pending
            value, clipped = bundle.normalizer.transform_value(idx, raw)
            record.session = record.engine.step(session, value)
        finally:
            record.lock.release()
        payload = {
            "session_id": session_id,
            "feature": bundle.name_of(idx),
            "normalized_value": value,
            "clipped": clipped,
            **status_payload(record.session),
        }
        if clipped:
            payload["warning"] = "value was outside the training range and was clipped"
        return payload

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        record = store.get(session_id)
        if record is None:
            return _error(404, "not_found", "unknown or expired session")
        session = record.session
        doc = session.to_dict()
        doc["log"] = [
            {**entry, "feature": bundle.name_of(rec.chosen)}
            for entry, rec in zip(doc["log"], session.log)
        ]
        return {
            "session_id": session_id,
            "delta": record.delta,
            "selector": record.selector,
            "feature_names": list(bundle.feature_names),
            "pending_feature": bundle.name_of(session.pending) if session.pending is not None else None,
            **doc,
            **status_payload(session),
        }

    @app.post("/sessions/{session_id}/whatif")
    async def whatif(session_id: str, request: Request):
        body = await parse_body(request)
        if isinstance(body, JSONResponse):
            return body
        record = store.get(session_id)
        if record is None:
            return _error(404, "not_found", "unknown or expired session")
        session = record.session
        if session.terminal is not None:
            return _error(409, "already_decided", "session already reached a decision")
        name = body.get("feature")
        idx = bundle.index_of(name) if isinstance(name, str) else None
        if idx is None:
            return _error(422, "unknown_feature", f"unknown feature {name!r}", "feature")
        if idx not in session.unrevealed:
            return _error(422, "not_unrevealed", f"feature {name!r} is not an unrevealed sensitive feature", "feature")
        try:
            raw = float(body.get("value"))
        except (TypeError, ValueError):
            return _error(422, "invalid_value", "'value' must be a number", "value")
        if not np.isfinite(raw):
            return _error(422, "invalid_value", "'value' must be finite", "value")
        value, clipped = bundle.normalizer.transform_value(idx, raw)
        result = record.engine.whatif(session, idx, value)
        return {
            "feature": name,
            "normalized_value": value,
            "clipped": clipped,
            "confidence_after": result.confidence,
            "would_decide": result.is_core,
            "label_if_decided": result.label,
        }

    return app
