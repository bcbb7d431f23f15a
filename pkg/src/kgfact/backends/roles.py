"""Chat-role bindings: which model serves each pipeline role, with what parameters."""

from __future__ import annotations

from dataclasses import dataclass

from kgfact.backends.base import ChatBackend, ChatRequest

EVALUATED_MODEL = "evaluated-model"
ABSTENTION_DETECTOR = "abstention-detector"
FACT_TRANSLATOR = "fact-translator"
LLM_ENTAILMENT = "llm-entailment"
EXPERT = "expert"

CHAT_ROLES = (EVALUATED_MODEL, ABSTENTION_DETECTOR, FACT_TRANSLATOR, LLM_ENTAILMENT, EXPERT)


@dataclass(frozen=True)
class RoleParams:
    temperature: float | None
    top_p: float | None


# The evaluated model runs on its provider defaults; judge roles pin their
# sampling parameters so verdicts are as stable as the backend allows.
ROLE_DEFAULTS: dict[str, RoleParams] = {
    EVALUATED_MODEL: RoleParams(temperature=None, top_p=None),
    ABSTENTION_DETECTOR: RoleParams(temperature=0.0, top_p=0.6),
    FACT_TRANSLATOR: RoleParams(temperature=0.3, top_p=0.5),
    LLM_ENTAILMENT: RoleParams(temperature=0.0, top_p=0.6),
    EXPERT: RoleParams(temperature=0.0, top_p=0.6),
}


@dataclass
class RoleBinding:
    """A chat role resolved to a backend, model id, and sampling parameters."""

    role: str
    backend: ChatBackend
    model_id: str
    temperature: float | None = None
    top_p: float | None = None
    max_tokens: int | None = None

    @classmethod
    def with_defaults(
        cls,
        role: str,
        backend: ChatBackend,
        model_id: str,
        temperature: float | None = None,
        top_p: float | None = None,
        max_tokens: int | None = None,
    ) -> "RoleBinding":
        defaults = ROLE_DEFAULTS.get(role, RoleParams(None, None))
        return cls(
            role=role,
            backend=backend,
            model_id=model_id,
            temperature=defaults.temperature if temperature is None else temperature,
            top_p=defaults.top_p if top_p is None else top_p,
            max_tokens=max_tokens,
        )

    def complete(self, user_prompt: str, system_prompt: str | None = None) -> str:
        request = ChatRequest(
            user_prompt=user_prompt,
            model_id=self.model_id,
            system_prompt=system_prompt,
            temperature=self.temperature,
            top_p=self.top_p,
            max_tokens=self.max_tokens,
        )
        return self.backend.chat_complete(request)
