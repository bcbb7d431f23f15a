"""HTTP service exposing the embedding and NLI wire contracts.

Request bodies are validated against the shared wire schemas shipped with
the harness package, so the two sides cannot drift apart. Handlers are
synchronous and run in the framework's worker pool; a per-device lock
serializes actual inference while the event loop keeps accepting requests.
The service holds no per-request state: identical payloads always produce
identical responses.
"""

from __future__ import annotations

import json
import math
import threading
from contextlib import asynccontextmanager
from importlib import resources

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from jsonschema import Draft202012Validator

from kgshim.config import ShimConfig
from kgshim.models import NLI_LABELS, EmbeddingModel, NliModel, resolve_embedding, resolve_nli


def _load_validator(name: str) -> Draft202012Validator:
    text = (resources.files("kgfact") / "schemas" / name).read_text("utf-8")
    return Draft202012Validator(json.loads(text))


EMBEDDING_REQUEST = _load_validator("embedding_request.schema.json")
NLI_REQUEST = _load_validator("nli_request.schema.json")


class _ShimState:
    """Loaded models plus the inference lock for the configured device."""

    def __init__(self):
        self.embedder: EmbeddingModel | None = None
        self.nli: NliModel | None = None
        self.device_lock = threading.Lock()

    @property
    def ready(self) -> bool:
        return self.embedder is not None and self.nli is not None


def _validate(validator: Draft202012Validator, payload) -> None:
    error = next(validator.iter_errors(payload), None)
    if error is not None:
        raise HTTPException(status_code=400, detail=error.message)


def create_app(config: ShimConfig) -> FastAPI:
    """Build the service; unresolvable model ids raise before startup."""
    load_embedding = resolve_embedding(config.embedding_model, config.device)
    load_nli = resolve_nli(config.nli_model, config.device)
    state = _ShimState()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        # A load failure propagates and the server refuses to start.
        state.embedder = load_embedding()
        state.nli = load_nli()
        yield

    app = FastAPI(title="kgshim", lifespan=lifespan)

    @app.exception_handler(RequestValidationError)
    async def invalid_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": "request body is not a JSON object"})

    def check_auth(request: Request) -> None:
        if config.api_key is None:
            return
        if request.headers.get("authorization") != f"Bearer {config.api_key}":
            raise HTTPException(status_code=401, detail="missing or invalid bearer token")

    def require_ready() -> None:
        if not state.ready:
            raise HTTPException(status_code=503, detail="models are still loading")

    @app.post("/v1/embeddings")
    def embeddings(payload: dict, request: Request):
        check_auth(request)
        require_ready()
        _validate(EMBEDDING_REQUEST, payload)
        if payload["model"] != config.embedding_model:
            raise HTTPException(
                status_code=400,
                detail=f"unknown model {payload['model']!r}; this shim serves {config.embedding_model!r}",
            )
        texts = list(payload["input"])
        if len(texts) > config.max_batch_size:
            raise HTTPException(
                status_code=413,
                detail=f"batch of {len(texts)} exceeds max_batch_size {config.max_batch_size}",
            )
        with state.device_lock:
            vectors = state.embedder.embed(texts)
        return {"data": [{"embedding": vector} for vector in vectors]}

    @app.post("/v1/nli")
    def nli(payload: dict, request: Request):
        check_auth(request)
        require_ready()
        _validate(NLI_REQUEST, payload)
        with state.device_lock:
            raw = state.nli.classify(payload["premise"], payload["hypothesis"])
        total = math.fsum(raw[label] for label in NLI_LABELS)
        scores = {label: raw[label] / total for label in NLI_LABELS}
        label = max(scores, key=scores.get)
        return {"label": label, "scores": scores}

    @app.get("/healthz")
    def healthz():
        return {
            "status": "ok" if state.ready else "loading",
            "models": {"embedding": config.embedding_model, "nli": config.nli_model},
        }

    return app
