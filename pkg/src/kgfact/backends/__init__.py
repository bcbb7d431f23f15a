"""Model backend clients: chat completion, embedding, and NLI classification."""

from kgfact.backends.base import (
    ChatBackend,
    ChatRequest,
    EmbeddingBackend,
    EmbeddingVector,
    NliBackend,
    NliLabel,
    NliVerdict,
)
from kgfact.backends.http import HttpChatBackend, HttpEmbeddingBackend, HttpNliBackend
from kgfact.backends.roles import ROLE_DEFAULTS, RoleBinding, RoleParams

__all__ = [
    "ChatBackend",
    "ChatRequest",
    "EmbeddingBackend",
    "EmbeddingVector",
    "NliBackend",
    "NliLabel",
    "NliVerdict",
    "HttpChatBackend",
    "HttpEmbeddingBackend",
    "HttpNliBackend",
    "RoleBinding",
    "RoleParams",
    "ROLE_DEFAULTS",
]
