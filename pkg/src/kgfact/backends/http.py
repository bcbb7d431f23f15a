"""HTTP clients for the chat, embedding, and NLI wire contracts."""

from __future__ import annotations

import json
from typing import Any

from kgfact.backends.base import ChatRequest, EmbeddingVector, NliLabel, NliVerdict
from kgfact.errors import (
    BackendRejected,
    BackendTimeout,
    DimensionMismatch,
    EmptyCompletion,
    EndpointUnavailable,
    LabelUnknown,
    MalformedResponse,
)
from kgfact.transport import Transport, TransportFailure, TransportResponse


def _post(
    transport: Transport,
    url: str,
    body: dict[str, Any],
    headers: dict[str, str] | None,
    timeout: float | None,
) -> Any:
    try:
        resp: TransportResponse = transport.request(
            "POST", url, json_body=body, headers=headers, timeout=timeout
        )
    except TransportFailure as exc:
        if exc.timed_out:
            raise BackendTimeout(str(exc)) from exc
        raise EndpointUnavailable(str(exc)) from exc
    if resp.status >= 400:
        raise BackendRejected(resp.status, resp.body)
    try:
        return json.loads(resp.body)
    except json.JSONDecodeError as exc:
        raise MalformedResponse(f"non-JSON body from {url}: {exc}") from exc


def _auth_headers(api_key: str | None) -> dict[str, str] | None:
    if api_key:
        return {"Authorization": f"Bearer {api_key}"}
    return None


class HttpChatBackend:
    """Chat-completions client in the de-facto open wire format."""

    def __init__(
        self,
        transport: Transport,
        base_url: str,
        api_key: str | None = None,
        timeout: float | None = None,
    ):
        self.transport = transport
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.timeout = timeout

    def chat_complete(self, request: ChatRequest) -> str:
        body: dict[str, Any] = {
            "model": request.model_id,
            "messages": request.messages(),
        }
        if request.temperature is not None:
            body["temperature"] = request.temperature
        if request.top_p is not None:
            body["top_p"] = request.top_p
        if request.max_tokens is not None:
            body["max_tokens"] = request.max_tokens
        payload = _post(
            self.transport,
            f"{self.base_url}/chat/completions",
            body,
            _auth_headers(self.api_key),
            self.timeout,
        )
        try:
            content = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedResponse(f"chat payload missing choices[0].message.content: {exc}") from exc
        if not isinstance(content, str) or not content.strip():
            raise EmptyCompletion(f"empty assistant content for model {request.model_id}")
        return content


class HttpEmbeddingBackend:
    """Embeddings client; enforces a constant vector dimension per run."""

    def __init__(
        self,
        transport: Transport,
        base_url: str,
        model_id: str,
        dimension: int,
        api_key: str | None = None,
        timeout: float | None = None,
    ):
        if dimension < 1:
            raise ValueError("dimension must be positive")
        self.transport = transport
        self.base_url = base_url.rstrip("/")
        self.model_id = model_id
        self.dimension = dimension
        self.api_key = api_key
        self.timeout = timeout

    def embed_text(self, text: str) -> EmbeddingVector:
        if not text.strip():
            raise ValueError("cannot embed empty text")
        payload = _post(
            self.transport,
            f"{self.base_url}/embeddings",
            {"model": self.model_id, "input": [text]},
            _auth_headers(self.api_key),
            self.timeout,
        )
        try:
            raw = payload["data"][0]["embedding"]
            values = tuple(float(v) for v in raw)
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise MalformedResponse(f"embedding payload missing data[0].embedding: {exc}") from exc
        if len(values) != self.dimension:
            raise DimensionMismatch(
                f"expected {self.dimension}-dimensional vector, got {len(values)}"
            )
        return EmbeddingVector(values)


class HttpNliBackend:
    """NLI client for the {premise, hypothesis} -> {label, scores} contract."""

    def __init__(
        self,
        transport: Transport,
        base_url: str,
        api_key: str | None = None,
        timeout: float | None = None,
    ):
        self.transport = transport
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.timeout = timeout

    def nli_classify(self, premise: str, hypothesis: str) -> NliVerdict:
        if not premise.strip() or not hypothesis.strip():
            raise ValueError("premise and hypothesis must be non-empty")
        payload = _post(
            self.transport,
            f"{self.base_url}/nli",
            {"premise": premise, "hypothesis": hypothesis},
            _auth_headers(self.api_key),
            self.timeout,
        )
        try:
            raw_label = str(payload["label"]).strip().lower()
            scores = payload["scores"]
            ent = float(scores["entailment"])
            neu = float(scores["neutral"])
            con = float(scores["contradiction"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedResponse(f"NLI payload missing label/scores: {exc}") from exc
        try:
            label = NliLabel(raw_label)
        except ValueError as exc:
            raise LabelUnknown(f"unmapped NLI label {raw_label!r}") from exc
        return NliVerdict(label=label, entailment=ent, neutral=neu, contradiction=con)
