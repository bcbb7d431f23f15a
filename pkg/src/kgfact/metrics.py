"""Assessment metrics: accuracy, difficulty-weighted accuracy, and hallucination rates.

All aggregation is a deterministic ordered fold over the per-question
records, so reports are reproducible bit-for-bit given the same run log.
Undefined rates (division by zero) surface as absent values, never as 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from scipy import stats

from kgfact.errors import (
    AllAbstained,
    DegenerateInput,
    EmptyRun,
    MissingCalibration,
    NoAlignedResponses,
)
from kgfact.verification import EntityClassification

FACTS_PER_QUESTION = 3


@dataclass(frozen=True)
class QuestionOutcome:
    """The metric-relevant slice of one scored question."""

    classification: EntityClassification
    points: int
    q_d: float

    def __post_init__(self):
        if not 0 <= self.points <= FACTS_PER_QUESTION:
            raise ValueError("points must be within 0..3")
        if self.classification is EntityClassification.ABSTAINED and self.points != 1:
            raise ValueError("abstentions carry exactly 1 point")
        if self.classification is EntityClassification.HALLUCINATED and self.points != 0:
            raise ValueError("hallucinated responses carry 0 points")

    @property
    def incorrect_facts(self) -> int:
        if self.classification is EntityClassification.ALIGNED:
            return FACTS_PER_QUESTION - self.points
        return 0


def _count(outcomes: Sequence[QuestionOutcome], cls: EntityClassification) -> int:
    return sum(1 for o in outcomes if o.classification is cls)


def accuracy(outcomes: Sequence[QuestionOutcome]) -> float:
    """Percent of attainable points earned, 3 per question."""
    if not outcomes:
        raise EmptyRun("cannot compute accuracy of an empty run")
    earned = sum(o.points for o in outcomes)
    return 100.0 * earned / (FACTS_PER_QUESTION * len(outcomes))


class WeightedAccuracy(NamedTuple):
    value: float
    capped: bool


def weighted_accuracy(
    accuracy_pct: float, assessment_qd: float, avg_qd_reference: float | None
) -> WeightedAccuracy:
    """Accuracy scaled by how hard this assessment was versus the reference."""
    if avg_qd_reference is None or avg_qd_reference <= 0:
        raise MissingCalibration("weighted accuracy needs a positive reference difficulty")
    raw = accuracy_pct * assessment_qd / avg_qd_reference
    if raw > 100.0:
        return WeightedAccuracy(100.0, True)
    return WeightedAccuracy(raw, False)


def halu_bok(outcomes: Sequence[QuestionOutcome]) -> float:
    """Percent of non-abstained responses rejected by the entity-level filter."""
    if not outcomes:
        raise EmptyRun("cannot compute rates of an empty run")
    abstained = _count(outcomes, EntityClassification.ABSTAINED)
    attempted = len(outcomes) - abstained
    if attempted == 0:
        raise AllAbstained("every response abstained; breadth rate undefined")
    return 100.0 * _count(outcomes, EntityClassification.HALLUCINATED) / attempted


def halu_dok(outcomes: Sequence[QuestionOutcome], variant: str = "aligned") -> float:
    """Percent of verified facts found incorrect.

    The default denominator is 3 per aligned response, since only aligned
    responses are fact-checked; variant="all" divides by 3 per question.
    """
    if not outcomes:
        raise EmptyRun("cannot compute rates of an empty run")
    if variant not in ("aligned", "all"):
        raise ValueError("variant must be 'aligned' or 'all'")
    incorrect = sum(o.incorrect_facts for o in outcomes)
    if variant == "all":
        return 100.0 * incorrect / (FACTS_PER_QUESTION * len(outcomes))
    aligned = _count(outcomes, EntityClassification.ALIGNED)
    if aligned == 0:
        raise NoAlignedResponses("nothing was fact-checked; depth rate undefined")
    return 100.0 * incorrect / (FACTS_PER_QUESTION * aligned)


def abstain_rate(outcomes: Sequence[QuestionOutcome]) -> float:
    if not outcomes:
        raise EmptyRun("cannot compute rates of an empty run")
    return 100.0 * _count(outcomes, EntityClassification.ABSTAINED) / len(outcomes)


def classification_distribution(outcomes: Sequence[QuestionOutcome]) -> dict[str, float]:
    if not outcomes:
        raise EmptyRun("cannot compute distributions of an empty run")
    n = len(outcomes)
    return {
        cls.value: 100.0 * _count(outcomes, cls) / n
        for cls in (
            EntityClassification.ALIGNED,
            EntityClassification.HALLUCINATED,
            EntityClassification.ABSTAINED,
        )
    }


def fact_halu_distribution(outcomes: Sequence[QuestionOutcome]) -> list[float] | None:
    """Share of aligned responses with 0, 1, 2, or 3 incorrect facts."""
    aligned = [o for o in outcomes if o.classification is EntityClassification.ALIGNED]
    if not aligned:
        return None
    counts = [0, 0, 0, 0]
    for o in aligned:
        counts[o.incorrect_facts] += 1
    return [100.0 * c / len(aligned) for c in counts]


def assessment_difficulty(outcomes: Sequence[QuestionOutcome]) -> float:
    if not outcomes:
        raise EmptyRun("cannot average difficulty of an empty run")
    return math.fsum(o.q_d for o in outcomes) / len(outcomes)


class RankCorrelations(NamedTuple):
    spearman_rho: float
    kendall_tau: float


def rank_correlations(
    estimated: Sequence[float], realized: Sequence[float]
) -> RankCorrelations:
    """Spearman and Kendall correlations with average-rank tie handling."""
    if len(estimated) != len(realized):
        raise ValueError("series must have equal lengths")
    if len(estimated) < 3:
        raise DegenerateInput("rank correlation needs at least 3 points")
    if len(set(estimated)) < 2 or len(set(realized)) < 2:
        raise DegenerateInput("rank correlation of a constant series is undefined")
    rho = stats.spearmanr(estimated, realized).statistic
    tau = stats.kendalltau(estimated, realized).statistic
    return RankCorrelations(float(rho), float(tau))


@dataclass(frozen=True)
class AssessmentReport:
    n_questions: int
    accuracy: float
    weighted_accuracy: float
    wa_capped: bool
    assessment_qd: float
    avg_qd_reference: float
    abstain_rate: float
    halu_bok: float | None
    halu_dok: float | None
    halu_dok_variant: str
    classification_distribution: dict[str, float]
    fact_halu_distribution: list[float] | None

    def to_dict(self) -> dict:
        return {
            "n_questions": self.n_questions,
            "accuracy": self.accuracy,
            "weighted_accuracy": self.weighted_accuracy,
            "wa_capped": self.wa_capped,
            "assessment_qd": self.assessment_qd,
            "avg_qd_reference": self.avg_qd_reference,
            "abstain_rate": self.abstain_rate,
            "halu_bok": self.halu_bok,
            "halu_dok": self.halu_dok,
            "halu_dok_variant": self.halu_dok_variant,
            "classification_distribution": self.classification_distribution,
            "fact_halu_distribution": self.fact_halu_distribution,
        }


def build_report(
    outcomes: Sequence[QuestionOutcome],
    avg_qd_reference: float | None,
    dok_variant: str = "aligned",
) -> AssessmentReport:
    acc = accuracy(outcomes)
    qd = assessment_difficulty(outcomes)
    wa = weighted_accuracy(acc, qd, avg_qd_reference)
    try:
        bok = halu_bok(outcomes)
    except AllAbstained:
        bok = None
    try:
        dok = halu_dok(outcomes, dok_variant)
    except NoAlignedResponses:
        dok = None
    return AssessmentReport(
        n_questions=len(outcomes),
        accuracy=acc,
        weighted_accuracy=wa.value,
        wa_capped=wa.capped,
        assessment_qd=qd,
        avg_qd_reference=avg_qd_reference,
        abstain_rate=abstain_rate(outcomes),
        halu_bok=bok,
        halu_dok=dok,
        halu_dok_variant=dok_variant,
        classification_distribution=classification_distribution(outcomes),
        fact_halu_distribution=fact_halu_distribution(outcomes),
    )


def cross_run_summary(values: Sequence[float]) -> tuple[float, float]:
    """Mean and population standard deviation across runs."""
    if not values:
        raise EmptyRun("no runs to summarize")
    mean = math.fsum(values) / len(values)
    var = math.fsum((v - mean) ** 2 for v in values) / len(values)
    return mean, math.sqrt(var)
