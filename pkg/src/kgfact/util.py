"""Small shared utilities: stable seeds, clocks, canonical JSON."""

from __future__ import annotations

import hashlib
import json
import threading
import time
from typing import Any


def derive_seed(*parts: Any) -> int:
    """Derive a stable 63-bit seed from arbitrary parts.

    Uses SHA-256 rather than hash() so the value survives interpreter
    restarts and PYTHONHASHSEED randomization; resume therefore never
    replays RNG state.
    """
    digest = hashlib.sha256("\x1f".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def canonical_json(obj: Any) -> str:
    """Serialize with a stable key order and separators (byte-reproducible)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def stable_hash(obj: Any) -> str:
    """Hex digest of the canonical JSON form of obj."""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


class Clock:
    """Wall clock; swap for VirtualClock in deterministic runs."""

    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)


class VirtualClock(Clock):
    """Deterministic clock: sleeping advances time, nothing else does.

    Keeps run logs byte-identical across invocations when all transports
    are fixtures (timings come out the same every run).
    """

    def __init__(self, start: float = 0.0):
        self._now = start
        self._lock = threading.Lock()

    def now(self) -> float:
        with self._lock:
            return self._now

    def sleep(self, seconds: float) -> None:
        with self._lock:
            self._now += max(0.0, seconds)
