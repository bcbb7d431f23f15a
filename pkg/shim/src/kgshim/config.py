"""Shim configuration: a small JSON file validated up front."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

from kgshim.errors import ShimConfigError


@dataclass(frozen=True)
class ShimConfig:
    """Startup settings; both model ids must resolve or the service refuses
    to start (create_app raises before any socket is bound)."""

    embedding_model: str
    nli_model: str
    host: str = "127.0.0.1"
    port: int = 8091
    max_batch_size: int = 32
    device: str = "cpu"
    api_key: str | None = None

    def __post_init__(self):
        for name in ("embedding_model", "nli_model", "host", "device"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value:
                raise ShimConfigError(f"{name} must be a non-empty string")
        if not isinstance(self.port, int) or isinstance(self.port, bool):
            raise ShimConfigError("port must be an integer")
        if not 1 <= self.port <= 65535:
            raise ShimConfigError(f"port {self.port} outside 1..65535")
        if not isinstance(self.max_batch_size, int) or isinstance(self.max_batch_size, bool):
            raise ShimConfigError("max_batch_size must be an integer")
        if self.max_batch_size < 1:
            raise ShimConfigError("max_batch_size must be at least 1")
        if self.api_key is not None and (not isinstance(self.api_key, str) or not self.api_key):
            raise ShimConfigError("api_key must be a non-empty string when set")


def load_shim_config(path: str | Path) -> ShimConfig:
    try:
        raw = json.loads(Path(path).read_text("utf-8"))
    except OSError as exc:
        raise ShimConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ShimConfigError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ShimConfigError(f"{path} must hold a JSON object")
    known = {f.name for f in fields(ShimConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ShimConfigError(f"unknown config keys: {', '.join(unknown)}")
    missing = sorted(name for name in ("embedding_model", "nli_model") if name not in raw)
    if missing:
        raise ShimConfigError(f"missing config keys: {', '.join(missing)}")
    return ShimConfig(**raw)
