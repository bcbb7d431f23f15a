"""Deterministic in-process backends for tests and offline runs.

The judge mocks parse the same prompt templates the pipeline renders, apply
small lexical rules, and reply in the wire formats the real judges would
use. They are deliberately imperfect (the entailment judge ignores
negation, for example) so that tests can steer a fact down any pipeline
path by choosing the response wording.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass
from typing import Callable

from kgfact.backends.base import ChatRequest, EmbeddingVector, NliLabel, NliVerdict
from kgfact.errors import DimensionMismatch
from kgfact.textsim import tokenize
from kgfact.util import derive_seed

_STOPWORDS = frozenset(
    "a an and are as at be by for from has his her in is it its of on or s "
    "t that the their this to was were what when where which with".split()
)


def content_tokens(text: str) -> set[str]:
    return {t for t in tokenize(text) if t not in _STOPWORDS}


def _negated_tokens(premise_tokens: list[str]) -> tuple[set[str], set[str]]:
    """Tokens directly preceded by 'not' and by 'never' in the premise."""
    notted: set[str] = set()
    nevered: set[str] = set()
    for prev, cur in zip(premise_tokens, premise_tokens[1:]):
        if prev == "not":
            notted.add(cur)
        elif prev == "never":
            nevered.add(cur)
    return notted, nevered


class ScriptedChatBackend:
    """Exact-match reply script keyed by (model_id, user_prompt)."""

    def __init__(self, replies: dict[tuple[str, str], str], default: str | None = None):
        self.replies = dict(replies)
        self.default = default
        self.calls: list[ChatRequest] = []

    def chat_complete(self, request: ChatRequest) -> str:
        self.calls.append(request)
        reply = self.replies.get((request.model_id, request.user_prompt), self.default)
        if reply is None:
            raise KeyError(
                f"no scripted reply for model {request.model_id!r} and this prompt"
            )
        return reply


class RuleChatBackend:
    """Backend delegating to an arbitrary rule, for one-off test doubles."""

    def __init__(self, rule: Callable[[ChatRequest], str]):
        self.rule = rule
        self.calls: list[ChatRequest] = []

    def chat_complete(self, request: ChatRequest) -> str:
        self.calls.append(request)
        return self.rule(request)


def _section(prompt: str, start_marker: str, end_marker: str | None) -> str:
    try:
        rest = prompt.split(start_marker, 1)[1]
    except IndexError:
        return ""
    if end_marker is None:
        return rest.strip()
    return rest.split(end_marker, 1)[0].strip()


class MockAbstentionJudge:
    """Flags refusal phrasing; otherwise answers 'Answered'."""

    _MARKERS = ("cannot answer", "i do not know", "i don't know", "unable to provide",
                "not familiar with")

    def chat_complete(self, request: ChatRequest) -> str:
        response = _section(request.user_prompt, "### Response: ", None)
        lowered = response.lower()
        if any(marker in lowered for marker in self._MARKERS):
            return "Abstained"
        return "Answered"


class MockTranslator:
    """Renders the tuple as '{name}'s {relation} {verb} {fact}.'.

    mangle_if lets a test force a reworded (contract-violating) sentence to
    exercise the deterministic fallback.
    """

    def __init__(self, mangle_if: Callable[[str], bool] | None = None):
        self.mangle_if = mangle_if

    def chat_complete(self, request: ChatRequest) -> str:
        inner = _section(request.user_prompt, "as the subject: (", "). Return only")
        parts = [p.strip() for p in inner.split(" , ")]
        if len(parts) != 4:
            return "I could not parse that tuple."
        subject, relation, verb, fact = parts
        name = subject.split(" (", 1)[0]
        if self.mangle_if is not None and self.mangle_if(fact):
            return f"The {relation} of that entity {verb} someplace."
        return f"{name}'s {relation} {verb} {fact}."


class MockEntailmentJudge:
    """Content-word subset rule; blind to negation by design.

    A response carrying the content words of the fact counts as EXPLICITLY
    STATED even when 'not'/'never' flips its meaning; that blind spot is
    what routes contradiction cases to the expert stage. Long facts (4 or
    more content words) tolerate a single missing word, which is where this
    judge is laxer than the exact token-subset NLI rule.
    """

    def chat_complete(self, request: ChatRequest) -> str:
        response = _section(request.user_prompt, "### Response:\n", "\n\n### Fact:")
        fact = _section(request.user_prompt, "### Fact:\n", "\n\n### Response Options:")
        fact_words = content_tokens(fact)
        missing = fact_words - set(tokenize(response))
        if fact_words and (not missing or (len(missing) == 1 and len(fact_words) >= 4)):
            return "EXPLICITLY STATED: every detail of the fact appears in the response."
        notted, nevered = _negated_tokens(tokenize(response))
        if fact_words & (notted | nevered):
            return "CONTRADICTED: the response denies part of the fact."
        return "NOT MENTIONED: the response does not cover this fact."


class MockExpertJudge:
    """Tie-breaker rule: 'never' reads as denial, a lone 'not' as hedging."""

    def chat_complete(self, request: ChatRequest) -> str:
        response = _section(request.user_prompt, "### Response:\n", "\n\n### Fact:")
        fact = _section(request.user_prompt, "### Fact:\n", "\n\nExpert 1:")
        fact_words = content_tokens(fact)
        notted, nevered = _negated_tokens(tokenize(response))
        if fact_words & nevered:
            return "Expert 2"
        return "Expert 1"


@dataclass(frozen=True)
class SubjectCard:
    """What the mock subject model knows about one entity."""

    entity_id: str
    label: str
    description: str
    verb: str
    facts: dict[str, tuple[str, str]]  # lowercase relation label -> (label, value)


def _drop_first_content_word(value: str) -> str:
    """Remove the first non-stopword from a multi-word value."""
    words = value.split()
    for i, word in enumerate(words):
        if set(tokenize(word)) - _STOPWORDS:
            return " ".join(words[:i] + words[i + 1 :])
    return value


class MockSubjectModel:
    """Answers benchmark questions from subject cards, in one of six modes.

    The mode is a stable hash of the entity id, so a fixed corpus yields a
    fixed mix of full/partial/negated/wrong answers, hallucinated rants,
    and abstentions, covering every verdict class and fact-pipeline path.
    """

    def __init__(self, cards: dict[str, SubjectCard]):
        self.cards = dict(cards)

    @staticmethod
    def _parse_question(prompt: str) -> tuple[str, list[str]]:
        head = _section(prompt, "overview of ", ". Your response")
        name = head.rsplit(" (", 1)[0]
        tail = _section(prompt, "such as ", ". Focus exclusively")
        parts = tail.split(", ")
        if parts and parts[-1].startswith("and "):
            parts[-1] = parts[-1][4:]
        return name, parts

    @staticmethod
    def _fact_sentence(card: SubjectCard, relation: str, value: str) -> str:
        return f"{card.label}'s {relation} {card.verb} {value}."

    def chat_complete(self, request: ChatRequest) -> str:
        name, relations = self._parse_question(request.user_prompt)
        card = self.cards.get(name)
        if card is None or len(relations) != 3:
            return (
                "I am not certain which entity this refers to, but the name suggests "
                "a minor asteroid catalogued in the late twentieth century."
            )
        mode = derive_seed("subject-mode", card.entity_id) % 10
        if mode == 9:
            return f"I'm sorry, but I cannot answer questions about {card.label}."
        if mode in (7, 8):
            return (
                f"{card.label} is best known as a fictional starship from a short-lived "
                "radio serial. The vessel patrolled the outer colonies, crewed by "
                "volunteers, and its hull number became a catchphrase among collectors "
                "of vintage broadcast memorabilia."
            )
        found = [card.facts.get(rel) for rel in relations]
        sentences = []
        for slot, (rel, fact) in enumerate(zip(relations, found)):
            if fact is None:
                continue
            relation_label, value = fact
            if mode == 4 and slot == 1:
                # One content word of the value dropped: the exact NLI
                # token-subset check fails while the laxer judge still
                # counts the fact as explicitly stated.
                sentences.append(
                    f"{card.label}'s {relation_label} {card.verb} "
                    f"{_drop_first_content_word(value)}."
                )
            elif mode == 4 and slot == 2:
                continue
            elif mode == 5 and slot == 1:
                sentences.append(f"{card.label}'s {relation_label} {card.verb} never {value}.")
            elif mode == 5 and slot == 2:
                sentences.append(f"{card.label}'s {relation_label} {card.verb} not {value}.")
            elif mode == 6:
                sentences.append(
                    f"{card.label}'s {relation_label} {card.verb} someplace unrecorded."
                )
            else:
                sentences.append(self._fact_sentence(card, relation_label, value))
        return " ".join([card.description, *sentences])


class HashEmbeddingBackend:
    """Seeded gaussian row per token, summed with multiplicity.

    Identical texts embed identically; token-disjoint texts land nearly
    orthogonal for moderate dimensions. Rows derive from (seed, token) via
    a stable hash, so vectors are reproducible across processes.
    """

    def __init__(self, dimension: int = 48, seed: int = 0):
        if dimension < 1:
            raise ValueError("dimension must be positive")
        self.dimension = dimension
        self.seed = seed
        self._rows: dict[str, tuple[float, ...]] = {}
        self._lock = threading.Lock()

    def _row(self, token: str) -> tuple[float, ...]:
        with self._lock:
            row = self._rows.get(token)
        if row is None:
            rng = random.Random(derive_seed("hash-embed", self.seed, token))
            row = tuple(rng.gauss(0.0, 1.0) for _ in range(self.dimension))
            with self._lock:
                row = self._rows.setdefault(token, row)
        return row

    def embed_text(self, text: str) -> EmbeddingVector:
        if not text.strip():
            raise ValueError("cannot embed empty text")
        acc = [0.0] * self.dimension
        for token in tokenize(text):
            row = self._row(token)
            for i, v in enumerate(row):
                acc[i] += v
        return EmbeddingVector(tuple(acc))


class StaticEmbeddingBackend:
    """Fixed text->vector map, for tests that need exact geometry."""

    def __init__(self, vectors: dict[str, tuple[float, ...]]):
        if not vectors:
            raise ValueError("vectors map must be non-empty")
        dims = {len(v) for v in vectors.values()}
        if len(dims) != 1:
            raise DimensionMismatch(f"inconsistent vector dimensions: {sorted(dims)}")
        self.vectors = dict(vectors)
        self.dimension = dims.pop()

    def embed_text(self, text: str) -> EmbeddingVector:
        return EmbeddingVector(tuple(self.vectors[text]))


class RuleNliBackend:
    """Lexical three-way classifier.

    Order matters: negation is checked before the subset rule, otherwise
    'was not in Paris' would entail 'was in Paris'.
    """

    def nli_classify(self, premise: str, hypothesis: str) -> NliVerdict:
        if not premise.strip() or not hypothesis.strip():
            raise ValueError("premise and hypothesis must be non-empty")
        premise_tokens = tokenize(premise)
        premise_set = set(premise_tokens)
        hypothesis_set = set(tokenize(hypothesis))
        notted, nevered = _negated_tokens(premise_tokens)
        if content_tokens(hypothesis) & (notted | nevered):
            return NliVerdict(NliLabel.CONTRADICTION, 0.02, 0.08, 0.90)
        if hypothesis_set and hypothesis_set <= premise_set:
            return NliVerdict(NliLabel.ENTAILMENT, 0.90, 0.08, 0.02)
        return NliVerdict(NliLabel.NEUTRAL, 0.10, 0.80, 0.10)


class StaticNliBackend:
    """Fixed (premise, hypothesis) -> verdict map with a default."""

    def __init__(
        self,
        verdicts: dict[tuple[str, str], NliVerdict] | None = None,
        default: NliVerdict | None = None,
    ):
        self.verdicts = dict(verdicts or {})
        self.default = default

    def nli_classify(self, premise: str, hypothesis: str) -> NliVerdict:
        verdict = self.verdicts.get((premise, hypothesis), self.default)
        if verdict is None:
            raise KeyError("no scripted NLI verdict for this pair")
        return verdict
