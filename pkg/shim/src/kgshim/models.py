"""Model registry: ids resolve to loaders at startup, weights load later.

Two id schemes per endpoint. The offline ones (hash-<dim>[-<seed>] and
rule-nli) are deterministic and need no downloads; st:<name> and hf:<name>
pull real models through the optional `models` extra. Resolution checks
only that the id is well-formed, so a refusal happens before any socket is
bound; the heavyweight load runs inside the service's startup phase.
"""

from __future__ import annotations

import re
from typing import Callable, Protocol

from kgfact.backends.mock import HashEmbeddingBackend, RuleNliBackend

from kgshim.errors import UnknownModel

_HASH_ID = re.compile(r"^hash-([1-9]\d*)(?:-(\d+))?$")

NLI_LABELS = ("entailment", "neutral", "contradiction")


class EmbeddingModel(Protocol):
    dimension: int

    def embed(self, texts: list[str]) -> list[list[float]]: ...


class NliModel(Protocol):
    def classify(self, premise: str, hypothesis: str) -> dict[str, float]: ...


class HashEmbeddingModel:
    """Deterministic offline embedder behind ids like hash-48 or hash-48-7."""

    def __init__(self, dimension: int, seed: int):
        self._backend = HashEmbeddingBackend(dimension=dimension, seed=seed)
        self.dimension = dimension

    def embed(self, texts: list[str]) -> list[list[float]]:
        return [list(self._backend.embed_text(text).values) for text in texts]


class RuleNliModel:
    """Lexical NLI; the rule verdict already carries a full distribution."""

    def __init__(self):
        self._backend = RuleNliBackend()

    def classify(self, premise: str, hypothesis: str) -> dict[str, float]:
        verdict = self._backend.nli_classify(premise=premise, hypothesis=hypothesis)
        return {
            "entailment": verdict.entailment,
            "neutral": verdict.neutral,
            "contradiction": verdict.contradiction,
        }


class SentenceTransformerModel:
    """Real embedder; imports lazily so offline deployments skip the extra."""

    def __init__(self, name: str, device: str):
        from sentence_transformers import SentenceTransformer

        self._model = SentenceTransformer(name, device=device)
        self.dimension = int(self._model.get_sentence_embedding_dimension())

    def embed(self, texts: list[str]) -> list[list[float]]:
        rows = self._model.encode(texts, convert_to_numpy=True)
        return [[float(v) for v in row] for row in rows]


class TransformerNliModel:
    """Sequence-classification head whose labels must map onto the NLI set."""

    def __init__(self, name: str, device: str):
        import torch
        from transformers import AutoModelForSequenceClassification, AutoTokenizer

        self._torch = torch
        self._device = device
        self._tokenizer = AutoTokenizer.from_pretrained(name)
        self._model = AutoModelForSequenceClassification.from_pretrained(name).to(device).eval()
        id2label = {int(i): str(l).lower() for i, l in self._model.config.id2label.items()}
        if sorted(id2label.values()) != sorted(NLI_LABELS):
            raise UnknownModel(
                f"model {name!r} labels {sorted(id2label.values())} are not the NLI label set"
            )
        self._id2label = id2label

    def classify(self, premise: str, hypothesis: str) -> dict[str, float]:
        with self._torch.no_grad():
            batch = self._tokenizer(premise, hypothesis, return_tensors="pt", truncation=True)
            batch = {k: v.to(self._device) for k, v in batch.items()}
            logits = self._model(**batch).logits[0]
            probs = self._torch.softmax(logits, dim=-1).tolist()
        return {self._id2label[i]: float(p) for i, p in enumerate(probs)}


def resolve_embedding(model_id: str, device: str) -> Callable[[], EmbeddingModel]:
    match = _HASH_ID.match(model_id)
    if match:
        dimension = int(match.group(1))
        seed = int(match.group(2) or 0)
        return lambda: HashEmbeddingModel(dimension, seed)
    if model_id.startswith("st:") and model_id[3:]:
        name = model_id[3:]
        return lambda: SentenceTransformerModel(name, device)
    raise UnknownModel(
        f"embedding model {model_id!r} matches no known scheme; use hash-<dim>[-<seed>] or st:<name>"
    )


def resolve_nli(model_id: str, device: str) -> Callable[[], NliModel]:
    if model_id == "rule-nli":
        return lambda: RuleNliModel()
    if model_id.startswith("hf:") and model_id[3:]:
        name = model_id[3:]
        return lambda: TransformerNliModel(name, device)
    raise UnknownModel(
        f"NLI model {model_id!r} matches no known scheme; use rule-nli or hf:<name>"
    )
