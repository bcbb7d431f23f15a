"""HTTP transport stack shared by the KG client and model backends.

Layers compose as CachingTransport(RateLimitedTransport(inner)) where inner
is a live HttpTransport, a RecordingTransport wrapping one, a
ReplayTransport over a fixture store, or any test double. Fixture keys
exclude headers, so recorded runs replay without credentials.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Protocol
from urllib.parse import urlsplit

import requests

from kgfact.util import Clock, stable_hash


@dataclass(frozen=True)
class TransportResponse:
    status: int
    body: str


class TransportFailure(Exception):
    """Transport-level failure after retries; timed_out marks deadline hits."""

    def __init__(self, message: str, timed_out: bool = False):
        super().__init__(message)
        self.timed_out = timed_out


class Transport(Protocol):
    def request(
        self,
        method: str,
        url: str,
        *,
        params: dict[str, Any] | None = None,
        json_body: Any = None,
        headers: dict[str, str] | None = None,
        timeout: float | None = None,
    ) -> TransportResponse: ...


def request_key(method: str, url: str, params: dict[str, Any] | None, json_body: Any) -> str:
    """Stable hash of (method, url, params, body) identifying one request."""
    return stable_hash(
        {"method": method.upper(), "url": url, "params": params or {}, "body": json_body}
    )


class HttpTransport:
    """requests-backed transport with bounded retries.

    Connection errors, timeouts, and 5xx responses are retried with
    exponential backoff; 4xx responses are returned to the caller untouched
    (they are contract errors, not transient ones).
    """

    def __init__(
        self,
        retries: int = 3,
        backoff_base: float = 0.5,
        default_timeout: float = 30.0,
        user_agent: str = "kgfact/0.1",
        clock: Clock | None = None,
    ):
        self.retries = retries
        self.backoff_base = backoff_base
        self.default_timeout = default_timeout
        self.clock = clock or Clock()
        self._session = requests.Session()
        self._session.headers["User-Agent"] = user_agent

    def request(self, method, url, *, params=None, json_body=None, headers=None, timeout=None):
        deadline = timeout if timeout is not None else self.default_timeout
        last_error: Exception | None = None
        timed_out = False
        for attempt in range(self.retries + 1):
            if attempt:
                self.clock.sleep(self.backoff_base * (2 ** (attempt - 1)))
            try:
                resp = self._session.request(
                    method,
                    url,
                    params=params,
                    json=json_body,
                    headers=headers,
                    timeout=deadline,
                )
            except requests.Timeout as exc:
                last_error, timed_out = exc, True
                continue
            except requests.RequestException as exc:
                last_error, timed_out = exc, False
                continue
            if resp.status_code >= 500:
                last_error = RuntimeError(f"HTTP {resp.status_code} from {url}")
                timed_out = False
                continue
            return TransportResponse(status=resp.status_code, body=resp.text)
        raise TransportFailure(
            f"{method} {url} failed after {self.retries + 1} attempts: {last_error}",
            timed_out=timed_out,
        )

    def close(self) -> None:
        self._session.close()


class RateLimiter:
    """Per-host minimum-interval limiter, safe for concurrent callers."""

    def __init__(self, requests_per_second: float, clock: Clock | None = None):
        if requests_per_second <= 0:
            raise ValueError("requests_per_second must be positive")
        self.interval = 1.0 / requests_per_second
        self.clock = clock or Clock()
        self._lock = threading.Lock()
        self._next_slot: dict[str, float] = {}

    def acquire(self, host: str) -> None:
        with self._lock:
            now = self.clock.now()
            slot = max(self._next_slot.get(host, now), now)
            self._next_slot[host] = slot + self.interval
        self.clock.sleep(slot - now)


class RateLimitedTransport:
    def __init__(self, inner: Transport, limiter: RateLimiter):
        self.inner = inner
        self.limiter = limiter

    def request(self, method, url, *, params=None, json_body=None, headers=None, timeout=None):
        self.limiter.acquire(urlsplit(url).netloc)
        return self.inner.request(
            method, url, params=params, json_body=json_body, headers=headers, timeout=timeout
        )


class CachingTransport:
    """In-memory response cache; repeated requests return identical payloads."""

    def __init__(self, inner: Transport):
        self.inner = inner
        self._lock = threading.Lock()
        self._cache: dict[str, TransportResponse] = {}

    def request(self, method, url, *, params=None, json_body=None, headers=None, timeout=None):
        key = request_key(method, url, params, json_body)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        resp = self.inner.request(
            method, url, params=params, json_body=json_body, headers=headers, timeout=timeout
        )
        with self._lock:
            # First writer wins so concurrent fetches stay byte-identical.
            resp = self._cache.setdefault(key, resp)
        return resp


class FixtureStore:
    """One JSON file per recorded request, named by the request key."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def put(self, key: str, record: dict[str, Any]) -> None:
        path = self._path(key)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(record, sort_keys=True, indent=2, ensure_ascii=False))
        tmp.replace(path)

    def get(self, key: str) -> dict[str, Any] | None:
        path = self._path(key)
        if not path.exists():
            return None
        return json.loads(path.read_text())


class RecordingTransport:
    """Forwards to a live transport and records every exchange."""

    def __init__(self, inner: Transport, store: FixtureStore):
        self.inner = inner
        self.store = store
        self._lock = threading.Lock()

    def request(self, method, url, *, params=None, json_body=None, headers=None, timeout=None):
        resp = self.inner.request(
            method, url, params=params, json_body=json_body, headers=headers, timeout=timeout
        )
        key = request_key(method, url, params, json_body)
        with self._lock:
            self.store.put(
                key,
                {
                    "method": method.upper(),
                    "url": url,
                    "params": params or {},
                    "body": json_body,
                    "status": resp.status,
                    "response_body": resp.body,
                },
            )
        return resp


class ReplayTransport:
    """Serves recorded exchanges; never touches the network."""

    def __init__(self, store: FixtureStore):
        self.store = store

    def request(self, method, url, *, params=None, json_body=None, headers=None, timeout=None):
        key = request_key(method, url, params, json_body)
        record = self.store.get(key)
        if record is None:
            raise TransportFailure(f"no recorded fixture for {method} {url} (key {key[:12]}...)")
        return TransportResponse(status=record["status"], body=record["response_body"])
