"""Response verification: entity-level filter, fact pipeline, and scoring.

A response first passes the entity-level filter (abstention detection, then
blended semantic/token similarity against the entity description). Aligned
responses have each of their three requested facts verified by a three-stage
pipeline: NLI entailment short-circuit, LLM entailment judgment, and an
expert tie-breaker for NLI/LLM disagreements.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum

from kgfact import prompts
from kgfact.backends.base import EmbeddingBackend, NliBackend, NliLabel
from kgfact.backends.roles import RoleBinding
from kgfact.errors import InconsistentInput
from kgfact.kg.types import KGTriple, Tense
from kgfact.textsim import cosine, plain_token_similarity, token_set_similarity, tokenize
from kgfact.util import stable_hash

log = logging.getLogger("kgfact.verification")

DEFAULT_THRESHOLD = 0.700


class EntityClassification(str, Enum):
    ALIGNED = "aligned"
    HALLUCINATED = "hallucinated"
    ABSTAINED = "abstained"


class FactOutcome(str, Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"


class DecidingStage(str, Enum):
    NLI = "nli"
    LLM = "llm"
    EXPERT = "expert"


class LlmLabel(str, Enum):
    EXPLICITLY_STATED = "explicitly_stated"
    CONTRADICTED = "contradicted"
    NOT_MENTIONED = "not_mentioned"


@dataclass(frozen=True)
class EntityVerdict:
    classification: EntityClassification
    semantic_sim: float | None = None
    token_sim: float | None = None
    entity_sim: float | None = None
    threshold: float | None = None

    def __post_init__(self):
        sims = (self.semantic_sim, self.token_sim, self.entity_sim, self.threshold)
        if self.classification is EntityClassification.ABSTAINED:
            if any(v is not None for v in sims):
                raise InconsistentInput("abstained verdicts carry no similarity fields")
            return
        if any(v is None for v in sims):
            raise InconsistentInput("non-abstained verdicts need all similarity fields")
        if self.classification is EntityClassification.ALIGNED and not self.entity_sim >= self.threshold:
            raise InconsistentInput("aligned verdict with entity_sim below threshold")
        if self.classification is EntityClassification.HALLUCINATED and not self.entity_sim < self.threshold:
            raise InconsistentInput("hallucinated verdict with entity_sim at or above threshold")


@dataclass(frozen=True)
class FactVerdict:
    relation_id: str
    golden_fact: str
    outcome: FactOutcome
    deciding_stage: DecidingStage
    nli_label: NliLabel
    llm_label: LlmLabel | None = None
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.deciding_stage is DecidingStage.NLI:
            if self.nli_label is not NliLabel.ENTAILMENT or self.outcome is not FactOutcome.CORRECT:
                raise InconsistentInput("NLI-decided verdicts are entailment and correct")
        if self.deciding_stage is DecidingStage.EXPERT:
            if self.nli_label is not NliLabel.CONTRADICTION or self.llm_label is not LlmLabel.EXPLICITLY_STATED:
                raise InconsistentInput(
                    "expert stage is reachable only from contradiction + explicitly-stated"
                )


@dataclass(frozen=True)
class QuestionScore:
    points: int
    abstained: bool
    fact_verdicts: tuple[FactVerdict, ...] = ()

    def __post_init__(self):
        if not 0 <= self.points <= 3:
            raise InconsistentInput("points must be within 0..3")
        if self.abstained and (self.points != 1 or self.fact_verdicts):
            raise InconsistentInput("abstentions score exactly 1 point with no fact verdicts")
        if self.fact_verdicts and len(self.fact_verdicts) != 3:
            raise InconsistentInput("fact verdicts come in threes")


@dataclass(frozen=True)
class VerificationResult:
    entity_verdict: EntityVerdict
    fact_verdicts: tuple[FactVerdict, ...]
    score: QuestionScore
    transcript: tuple[dict, ...]


def entity_similarity(semantic: float, token: float) -> float:
    """70:30 blend of semantic and token similarity."""
    if not (0.0 <= semantic <= 1.0 and 0.0 <= token <= 1.0):
        raise ValueError("similarity inputs must be in [0, 1]")
    return 0.7 * semantic + 0.3 * token


def fallback_golden_fact(
    entity_label: str, relation_label: str, tense: Tense, fact_value: str
) -> str:
    return f"{entity_label}'s {relation_label} {tense.value} {fact_value}."


def extract_choice_label(reply: str, labels: dict[str, str]) -> str | None:
    """Earliest occurrence of any label phrase in the uppercased reply.

    labels maps an uppercase phrase (single spaces) to the canonical value
    returned on a match.
    """
    haystack = " ".join(reply.upper().split())
    best: tuple[int, str] | None = None
    for phrase, value in labels.items():
        pos = haystack.find(phrase)
        if pos >= 0 and (best is None or pos < best[0]):
            best = (pos, value)
    return best[1] if best else None


def extract_suffix_word(reply: str, words: frozenset[str]) -> str | None:
    """Last token of the reply that belongs to the expected word set."""
    for token in reversed(tokenize(reply)):
        if token in words:
            return token
    return None


_ABSTENTION_WORDS = frozenset({"abstained", "answered"})

_ENTAILMENT_LABELS = {
    "EXPLICITLY STATED": LlmLabel.EXPLICITLY_STATED.value,
    "CONTRADICTED": LlmLabel.CONTRADICTED.value,
    "NOT MENTIONED": LlmLabel.NOT_MENTIONED.value,
    # The prompt's task line also names "supported"; a bare SUPPORTED reply
    # is accepted as explicitly-stated but flagged for audit.
    "SUPPORTED": "supported",
}

_EXPERT_LABELS = {"EXPERT 1": "expert_1", "EXPERT 2": "expert_2"}


class Verifier:
    """Stateless verification engine over configured judge and model backends."""

    def __init__(
        self,
        abstention: RoleBinding,
        translator: RoleBinding,
        entailment: RoleBinding,
        expert: RoleBinding,
        embedder: EmbeddingBackend,
        nli: NliBackend,
        threshold: float = DEFAULT_THRESHOLD,
        token_mode: str = "token_set",
    ):
        if not 0.0 <= threshold <= 1.0:
            raise ValueError("threshold must be in [0, 1]")
        if token_mode not in ("token_set", "plain"):
            raise ValueError("token_mode must be 'token_set' or 'plain'")
        self.abstention = abstention
        self.translator = translator
        self.entailment = entailment
        self.expert = expert
        self.embedder = embedder
        self.nli = nli
        self.threshold = threshold
        self._token_fn = token_set_similarity if token_mode == "token_set" else plain_token_similarity

    # -- entity level -----------------------------------------------------

    def detect_abstention(self, question: str, response: str, transcript: list | None = None) -> bool:
        if not response:
            raise ValueError("response must be non-empty")
        prompt = prompts.ABSTENTION_PROMPT.format(question=question, response=response)
        word = None
        for attempt in range(2):
            reply = self.abstention.complete(prompt)
            if transcript is not None:
                transcript.append(
                    {"op": "chat", "role": self.abstention.role, "attempt": attempt, "reply": reply}
                )
            word = extract_suffix_word(reply, _ABSTENTION_WORDS)
            if word is not None:
                break
        if word is None:
            log.warning("abstention detector reply unparseable twice; defaulting to Answered")
            return False
        return word == "abstained"

    def semantic_similarity(self, response: str, description: str, transcript: list | None = None) -> float:
        r = self.embedder.embed_text(response)
        d = self.embedder.embed_text(description)
        if transcript is not None:
            transcript.append(
                {
                    "op": "embed_pair",
                    "response_vector": stable_hash(list(r.values)),
                    "description_vector": stable_hash(list(d.values)),
                }
            )
        # Clamp both ends: near-parallel vectors can exceed 1.0 by a ULP.
        return min(1.0, max(0.0, cosine(r.values, d.values)))

    def token_similarity(self, response: str, description: str) -> float:
        return self._token_fn(response, description)

    def classify_entity_level(
        self,
        question: str,
        response: str,
        description: str,
        threshold: float | None = None,
        transcript: list | None = None,
    ) -> EntityVerdict:
        limit = self.threshold if threshold is None else threshold
        if self.detect_abstention(question, response, transcript):
            return EntityVerdict(EntityClassification.ABSTAINED)
        semantic = self.semantic_similarity(response, description, transcript)
        token = self.token_similarity(response, description)
        blended = entity_similarity(semantic, token)
        classification = (
            EntityClassification.ALIGNED
            if blended >= limit
            else EntityClassification.HALLUCINATED
        )
        return EntityVerdict(
            classification=classification,
            semantic_sim=semantic,
            token_sim=token,
            entity_sim=blended,
            threshold=limit,
        )

    # -- fact level --------------------------------------------------------

    def render_golden_fact(
        self,
        entity_label: str,
        entity_type: str,
        relation_label: str,
        tense: Tense,
        fact_value: str,
        transcript: list | None = None,
    ) -> tuple[str, bool]:
        """Translate the triple to a sentence; returns (sentence, used_fallback).

        The translator must keep the entity name and the fact value verbatim;
        after one retry the deterministic template takes over.
        """
        prompt = prompts.TRANSLATOR_PROMPT.format(
            entity_name=entity_label,
            entity_type=entity_type,
            relation=relation_label,
            verb=tense.value,
            fact=fact_value,
        )
        for attempt in range(2):
            sentence = self.translator.complete(prompt).strip()
            if transcript is not None:
                transcript.append(
                    {"op": "chat", "role": self.translator.role, "attempt": attempt, "reply": sentence}
                )
            if entity_label in sentence and fact_value in sentence:
                return sentence, False
        log.warning("translator reworded protected fields twice; using fallback sentence")
        return fallback_golden_fact(entity_label, relation_label, tense, fact_value), True

    def _llm_entailment_label(self, golden_fact: str, response: str, transcript: list | None) -> tuple[str | None, bool]:
        prompt = prompts.LLM_ENTAILMENT_PROMPT.format(response=response, golden_fact=golden_fact)
        for attempt in range(2):
            reply = self.entailment.complete(prompt)
            if transcript is not None:
                transcript.append(
                    {"op": "chat", "role": self.entailment.role, "attempt": attempt, "reply": reply}
                )
            label = extract_choice_label(reply, _ENTAILMENT_LABELS)
            if label == "supported":
                return LlmLabel.EXPLICITLY_STATED.value, True
            if label is not None:
                return label, False
        return None, False

    def _expert_choice(self, golden_fact: str, response: str, transcript: list | None) -> str | None:
        prompt = prompts.EXPERT_PROMPT.format(response=response, golden_fact=golden_fact)
        for attempt in range(2):
            reply = self.expert.complete(prompt)
            if transcript is not None:
                transcript.append(
                    {"op": "chat", "role": self.expert.role, "attempt": attempt, "reply": reply}
                )
            choice = extract_choice_label(reply, _EXPERT_LABELS)
            if choice is not None:
                return choice
        return None

    def verify_fact(
        self,
        relation_id: str,
        golden_fact: str,
        response: str,
        transcript: list | None = None,
    ) -> FactVerdict:
        verdict = self.nli.nli_classify(premise=response, hypothesis=golden_fact)
        if transcript is not None:
            transcript.append(
                {"op": "nli", "label": verdict.label.value, "scores": verdict.scores()}
            )
        if verdict.label is NliLabel.ENTAILMENT:
            return FactVerdict(
                relation_id=relation_id,
                golden_fact=golden_fact,
                outcome=FactOutcome.CORRECT,
                deciding_stage=DecidingStage.NLI,
                nli_label=verdict.label,
            )

        raw_label, supported = self._llm_entailment_label(golden_fact, response, transcript)
        flags = ("supported_label",) if supported else ()
        if raw_label is None:
            log.warning("entailment judge unparseable twice; scoring fact incorrect")
            return FactVerdict(
                relation_id=relation_id,
                golden_fact=golden_fact,
                outcome=FactOutcome.INCORRECT,
                deciding_stage=DecidingStage.LLM,
                nli_label=verdict.label,
                llm_label=None,
                flags=("unparseable_label",),
            )
        llm_label = LlmLabel(raw_label)
        if llm_label in (LlmLabel.CONTRADICTED, LlmLabel.NOT_MENTIONED):
            return FactVerdict(
                relation_id=relation_id,
                golden_fact=golden_fact,
                outcome=FactOutcome.INCORRECT,
                deciding_stage=DecidingStage.LLM,
                nli_label=verdict.label,
                llm_label=llm_label,
                flags=flags,
            )
        if verdict.label is NliLabel.NEUTRAL:
            # The lightweight classifier saw nothing decisive; the LLM's
            # explicit-statement judgment stands.
            return FactVerdict(
                relation_id=relation_id,
                golden_fact=golden_fact,
                outcome=FactOutcome.CORRECT,
                deciding_stage=DecidingStage.LLM,
                nli_label=verdict.label,
                llm_label=llm_label,
                flags=flags,
            )

        choice = self._expert_choice(golden_fact, response, transcript)
        if choice is None:
            log.warning("expert judge unparseable twice; scoring fact incorrect")
            return FactVerdict(
                relation_id=relation_id,
                golden_fact=golden_fact,
                outcome=FactOutcome.INCORRECT,
                deciding_stage=DecidingStage.EXPERT,
                nli_label=verdict.label,
                llm_label=llm_label,
                flags=flags + ("unparseable_label",),
            )
        return FactVerdict(
            relation_id=relation_id,
            golden_fact=golden_fact,
            outcome=FactOutcome.CORRECT if choice == "expert_1" else FactOutcome.INCORRECT,
            deciding_stage=DecidingStage.EXPERT,
            nli_label=verdict.label,
            llm_label=llm_label,
            flags=flags,
        )

    # -- question level ------------------------------------------------------

    def verify_question(
        self,
        question: str,
        response: str,
        description: str,
        entity_label: str,
        type_label: str,
        triples: tuple[KGTriple, KGTriple, KGTriple],
    ) -> VerificationResult:
        transcript: list[dict] = []
        entity_verdict = self.classify_entity_level(
            question, response, description, transcript=transcript
        )
        fact_verdicts: tuple[FactVerdict, ...] = ()
        if entity_verdict.classification is EntityClassification.ALIGNED:
            verdicts = []
            for triple in triples:
                golden, used_fallback = self.render_golden_fact(
                    entity_label,
                    type_label,
                    triple.relation_label,
                    triple.tense_indicator,
                    triple.fact_value,
                    transcript=transcript,
                )
                verdict = self.verify_fact(triple.relation_id, golden, response, transcript)
                if used_fallback:
                    verdict = replace(verdict, flags=verdict.flags + ("translator_fallback",))
                verdicts.append(verdict)
            fact_verdicts = tuple(verdicts)
        score = score_question(entity_verdict, fact_verdicts)
        return VerificationResult(
            entity_verdict=entity_verdict,
            fact_verdicts=fact_verdicts,
            score=score,
            transcript=tuple(transcript),
        )


def score_question(
    entity_verdict: EntityVerdict, fact_verdicts: tuple[FactVerdict, ...]
) -> QuestionScore:
    """Abstained 1 point, hallucinated 0, aligned the count of correct facts."""
    classification = entity_verdict.classification
    if classification is EntityClassification.ALIGNED:
        if len(fact_verdicts) != 3:
            raise InconsistentInput("aligned responses need exactly 3 fact verdicts")
        points = sum(1 for v in fact_verdicts if v.outcome is FactOutcome.CORRECT)
        return QuestionScore(points=points, abstained=False, fact_verdicts=fact_verdicts)
    if fact_verdicts:
        raise InconsistentInput("fact verdicts are only valid for aligned responses")
    if classification is EntityClassification.ABSTAINED:
        return QuestionScore(points=1, abstained=True)
    return QuestionScore(points=0, abstained=False)
