"""Backend-neutral request/response types and client protocols."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Protocol, runtime_checkable

from kgfact.errors import LabelUnknown


@dataclass(frozen=True)
class ChatRequest:
    """One chat-completion call.

    temperature and top_p are optional: judge roles pin them, while the
    evaluated model runs on its provider defaults when they are unset.
    """

    user_prompt: str
    model_id: str
    system_prompt: str | None = None
    temperature: float | None = None
    top_p: float | None = None
    max_tokens: int | None = None

    def __post_init__(self):
        if not self.user_prompt:
            raise ValueError("user_prompt must be non-empty")
        if not self.model_id:
            raise ValueError("model_id must be non-empty")
        if self.system_prompt is not None and not self.system_prompt:
            raise ValueError("system_prompt, when given, must be non-empty")
        if self.temperature is not None and self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.top_p is not None and not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")
        if self.max_tokens is not None and self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")

    def messages(self) -> list[dict[str, str]]:
        msgs = []
        if self.system_prompt is not None:
            msgs.append({"role": "system", "content": self.system_prompt})
        msgs.append({"role": "user", "content": self.user_prompt})
        return msgs


class NliLabel(str, Enum):
    ENTAILMENT = "entailment"
    NEUTRAL = "neutral"
    CONTRADICTION = "contradiction"


@dataclass(frozen=True)
class NliVerdict:
    """Three-way NLI outcome with normalized class scores."""

    label: NliLabel
    entailment: float
    neutral: float
    contradiction: float

    def __post_init__(self):
        if min(self.entailment, self.neutral, self.contradiction) < 0:
            raise ValueError("NLI scores must be non-negative")
        total = self.entailment + self.neutral + self.contradiction
        if not math.isfinite(total) or total <= 0:
            raise ValueError("NLI scores must have a positive finite sum")
        object.__setattr__(self, "entailment", self.entailment / total)
        object.__setattr__(self, "neutral", self.neutral / total)
        object.__setattr__(self, "contradiction", self.contradiction / total)
        scores = self.scores()
        # Ties allowed: the label must sit at a maximal score, not the sole one.
        if scores[self.label.value] < max(scores.values()):
            raise LabelUnknown(
                f"label {self.label.value!r} does not match argmax of scores {scores}"
            )

    def scores(self) -> dict[str, float]:
        return {
            "entailment": self.entailment,
            "neutral": self.neutral,
            "contradiction": self.contradiction,
        }


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise ValueError("embedding vector must be non-empty")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("embedding vector must be finite")

    @property
    def dimension(self) -> int:
        return len(self.values)


@runtime_checkable
class ChatBackend(Protocol):
    def chat_complete(self, request: ChatRequest) -> str: ...


@runtime_checkable
class EmbeddingBackend(Protocol):
    dimension: int

    def embed_text(self, text: str) -> EmbeddingVector: ...


@runtime_checkable
class NliBackend(Protocol):
    def nli_classify(self, premise: str, hypothesis: str) -> NliVerdict: ...
