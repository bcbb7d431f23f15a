"""Shared shim-test helpers; imported only when the shim is installed."""

from __future__ import annotations

from kgfact.transport import TransportResponse

from kgshim.config import ShimConfig


def make_config(**overrides) -> ShimConfig:
    settings = {
        "embedding_model": "hash-48-7",
        "nli_model": "rule-nli",
        "max_batch_size": 8,
    }
    settings.update(overrides)
    return ShimConfig(**settings)


class ClientTransport:
    """Harness-side Transport backed by an in-process test client."""

    def __init__(self, client):
        self.client = client

    def request(self, method, url, json_body=None, headers=None, timeout=None):
        response = self.client.request(method, url, json=json_body, headers=headers)
        return TransportResponse(status=response.status_code, body=response.text)
