"""HTTP serving of a trained model.

One JSON endpoint classifies a description; a health endpoint reports
readiness. Request validation is done by hand (not by framework models)
because the error contract is part of the interface: failures return
``{"code": ..., "message": ...}`` with a specific code per failure mode,
and that shape must not drift with framework versions.

The model file is read once at startup. Its identity is the first twelve
hex digits of the SHA-256 of the file bytes, echoed in every response so
clients can tell which model produced a suggestion.
"""

from __future__ import annotations

import json
import logging
import os
import time
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .persist import load_model, model_version

log = logging.getLogger(__name__)

MODEL_ENV_VAR = "CATEGORIZA_MODEL"
LABELS_ENV_VAR = "CATEGORIZA_LABELS"
MAX_BODY_BYTES = 64 * 1024
MAX_K = 25
DEFAULT_K = 3


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def _load_labels(path: Path) -> dict[str, str]:
    data = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(data, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in data.items()
    ):
        raise ValueError(f"labels file {path} must map class codes to strings")
    return data


def create_app(
    model_path: str | os.PathLike | None = None,
    labels_path: str | os.PathLike | None = None,
) -> FastAPI:
    """Build the application; the model loads when the server starts.

    Paths fall back to the CATEGORIZA_MODEL and CATEGORIZA_LABELS
    environment variables. With no model path at all the app still serves,
    answering 503 until one is configured and the process restarted.
    """

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        resolved = model_path or os.environ.get(MODEL_ENV_VAR)
        if resolved:
            app.state.model = load_model(resolved)
            app.state.model_version = model_version(resolved)
            log.info(
                "loaded model %s (%d classes, %d terms)",
                app.state.model_version,
                len(app.state.model.classes),
                len(app.state.model.vocabulary),
            )
        labels = labels_path or os.environ.get(LABELS_ENV_VAR)
        if labels:
            app.state.labels = _load_labels(Path(labels))
        app.state.started_at = time.monotonic()
        yield

    app = FastAPI(title="categoriza", lifespan=lifespan)
    app.state.model = None
    app.state.model_version = None
    app.state.labels = {}
    app.state.started_at = None

    @app.get("/v1/health")
    async def health() -> JSONResponse:
        if app.state.model is None:
            return JSONResponse(status_code=503, content={"status": "loading"})
        return JSONResponse(
            status_code=200,
            content={
                "status": "ok",
                "model_version": app.state.model_version,
                "vocabulary_size": len(app.state.model.vocabulary),
                "class_count": len(app.state.model.classes),
                "uptime_seconds": round(time.monotonic() - app.state.started_at, 3),
            },
        )

    @app.post("/v1/classify")
    async def classify(request: Request) -> JSONResponse:
        body = await request.body()
        if len(body) > MAX_BODY_BYTES:
            return _error(413, "request_too_large", f"body exceeds {MAX_BODY_BYTES} bytes")
        if app.state.model is None:
            return _error(503, "model_not_loaded", "no model is loaded")
        try:
            payload = json.loads(body)
        except json.JSONDecodeError:
            return _error(422, "invalid_request", "body is not valid JSON")
        if not isinstance(payload, dict):
            return _error(422, "invalid_request", "body must be a JSON object")

        description = payload.get("description")
        if not isinstance(description, str) or not description.strip():
            return _error(422, "empty_description", "description must be a non-empty string")

        k = payload.get("k", DEFAULT_K)
        if isinstance(k, bool) or not isinstance(k, int):
            return _error(422, "invalid_request", "k must be an integer")
        if k < 1:
            return _error(422, "invalid_request", "k must be at least 1")
        k = min(k, MAX_K, len(app.state.model.classes))

        result = app.state.model.suggest(description, k)
        suggestions = [
            {
                "class_code": s.class_code,
                "label": app.state.labels.get(s.class_code),
                "probability": round(s.probability, 4),
            }
            for s in result.suggestions
        ]
        return JSONResponse(
            status_code=200,
            content={
                "suggestions": suggestions,
                "model_version": app.state.model_version,
                "fallback": result.fallback,
            },
        )

    return app


app = create_app()
