"""Entity popularity, question complexity, and sigmoid difficulty scoring.

Difficulty follows an item-response-style curve: a question is hard when
its relation complexity outruns how well-represented the focal entity is,
and the sigmoid spreads moderate cases across the middle of (0, 1).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, NamedTuple

from kgfact.errors import CalibrationMissing, ConfigError, UnknownType
from kgfact.kg.types import STATISTIC_FIELDS, EntityStatistics

DEFAULT_ALPHA = 5.0
DEFAULT_MIX = 0.5


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


@dataclass(frozen=True)
class DifficultyInputs:
    """Mean relation complexity and normalized popularity, both in [0, 1]."""

    q_avg: float
    ep_norm: float

    def __post_init__(self):
        object.__setattr__(self, "q_avg", _clamp01(self.q_avg))
        object.__setattr__(self, "ep_norm", _clamp01(self.ep_norm))


@dataclass
class WeightTable:
    """Calibrated weights driving popularity and complexity scoring.

    stat_weights are normalized to sum to 1 on construction. The shipped
    default file uses uniform statistic weights; a run's `calibrate` command
    replaces the type and relation weights with log-derived values.
    """

    stat_weights: tuple[float, ...]
    type_weights: dict[str, float] = field(default_factory=dict)
    relation_weights: dict[str, dict[str, float]] = field(default_factory=dict)
    alpha: float = DEFAULT_ALPHA
    mix: float = DEFAULT_MIX
    ep_norm_bounds: tuple[float, float] | None = None
    avg_qd: float | None = None
    calibrated_at: str | None = None

    def __post_init__(self):
        if len(self.stat_weights) != len(STATISTIC_FIELDS):
            raise ValueError(f"stat_weights must have {len(STATISTIC_FIELDS)} entries")
        if any(w < 0 for w in self.stat_weights):
            raise ValueError("stat_weights must be non-negative")
        total = math.fsum(self.stat_weights)
        if total <= 0:
            raise ValueError("stat_weights must not all be zero")
        self.stat_weights = tuple(w / total for w in self.stat_weights)
        if not 0.0 <= self.mix <= 1.0:
            raise ValueError("mix must be in [0, 1]")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        for type_id, w in self.type_weights.items():
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"type weight for {type_id} outside [0, 1]")
        for type_id, rels in self.relation_weights.items():
            for rel, w in rels.items():
                if not 0.0 <= w <= 1.0:
                    raise ValueError(f"relation weight {type_id}/{rel} outside [0, 1]")
        if self.ep_norm_bounds is not None:
            lo, hi = self.ep_norm_bounds
            if not lo < hi:
                raise ValueError("ep_norm_bounds must satisfy min < max")
        if self.avg_qd is not None and not 0.0 < self.avg_qd < 1.0:
            raise ValueError("avg_qd must lie strictly inside (0, 1)")

    def type_weight(self, type_id: str, default: float = 0.5) -> float:
        return self.type_weights.get(type_id, default)

    def relation_weight(self, type_id: str, relation_id: str, default: float = 0.5) -> float:
        return self.relation_weights.get(type_id, {}).get(relation_id, default)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "mix": self.mix,
            "stat_weights": list(self.stat_weights),
            "type_weights": dict(sorted(self.type_weights.items())),
            "relation_weights": {
                t: dict(sorted(r.items())) for t, r in sorted(self.relation_weights.items())
            },
            "ep_norm_bounds": list(self.ep_norm_bounds) if self.ep_norm_bounds else None,
            "avg_qd": self.avg_qd,
            "calibrated_at": self.calibrated_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WeightTable":
        bounds = data.get("ep_norm_bounds")
        return cls(
            stat_weights=tuple(data["stat_weights"]),
            type_weights=dict(data.get("type_weights", {})),
            relation_weights={t: dict(r) for t, r in data.get("relation_weights", {}).items()},
            alpha=data.get("alpha", DEFAULT_ALPHA),
            mix=data.get("mix", DEFAULT_MIX),
            ep_norm_bounds=tuple(bounds) if bounds else None,
            avg_qd=data.get("avg_qd"),
            calibrated_at=data.get("calibrated_at"),
        )


def log_normalize(stats: EntityStatistics) -> tuple[float, ...]:
    """ln(1 + value) per statistic, in canonical field order."""
    return tuple(math.log1p(v) for v in stats.as_vector())


def relevance_raw(stats: EntityStatistics, table: WeightTable) -> float:
    """Weighted sum of log-normalized statistics, before min-max scaling.

    fsum keeps the sum exact, so the value is invariant under permutation
    of the (statistic, weight) pairs.
    """
    return math.fsum(w * x for w, x in zip(table.stat_weights, log_normalize(stats)))


def entity_relevance(stats: EntityStatistics, table: WeightTable) -> float:
    """Min-max scaled relevance in [0, 1], against calibration bounds."""
    if table.ep_norm_bounds is None:
        raise CalibrationMissing("no ep_norm_bounds loaded; run calibrate or supply defaults")
    lo, hi = table.ep_norm_bounds
    return _clamp01((relevance_raw(stats, table) - lo) / (hi - lo))


def entity_popularity(relevance: float, type_weight: float, mix: float = DEFAULT_MIX) -> float:
    """Blend of individual relevance and type relevance."""
    return _clamp01(mix * relevance + (1.0 - mix) * type_weight)


def question_complexity(relation_weights: Iterable[float]) -> float:
    """Arithmetic mean of the three relation weights."""
    weights = list(relation_weights)
    if len(weights) != 3:
        raise ValueError(f"expected exactly 3 relation weights, got {len(weights)}")
    return math.fsum(weights) / 3.0


class HallucinationComplexity(NamedTuple):
    total: float
    q_avg: float


def entity_hallucination_complexity(type_id: str, table: WeightTable) -> HallucinationComplexity:
    """Complexity substitute for conceptually hallucinated responses.

    The question's complexity then stems from the focal entity, not the
    three relations: the per-question total is three times the mean weight
    of the type's whole relation set, and q_avg stays the set mean.
    """
    rels = table.relation_weights.get(type_id)
    if not rels:
        raise UnknownType(f"no relation-weight set for type {type_id!r}")
    mean = math.fsum(rels.values()) / len(rels)
    return HallucinationComplexity(total=3.0 * mean, q_avg=mean)


def question_difficulty(inputs: DifficultyInputs, alpha: float = DEFAULT_ALPHA) -> float:
    """Sigmoid of alpha * (q_avg - ep_norm); strictly inside (0, 1)."""
    return 1.0 / (1.0 + math.exp(-alpha * (inputs.q_avg - inputs.ep_norm)))


def load_weight_table(path: str | Path | None = None) -> WeightTable:
    """Load weights from a JSON file; without a path, the packaged defaults."""
    try:
        if path is None:
            text = (resources.files("kgfact.data") / "default_weights.json").read_text("utf-8")
        else:
            text = Path(path).read_text("utf-8")
        return WeightTable.from_dict(json.loads(text))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"cannot load weight table from {path or 'packaged defaults'}: {exc}") from exc


def save_weight_table(table: WeightTable, path: str | Path) -> None:
    Path(path).write_text(json.dumps(table.to_dict(), indent=2) + "\n", encoding="utf-8")


# --- calibration ---------------------------------------------------------


@dataclass(frozen=True)
class CalibrationRecord:
    """One scored question as calibration evidence."""

    type_id: str
    relation_ids: tuple[str, ...]
    question_score: int
    q_d: float
    stats: EntityStatistics | None = None


def _min_max(values: dict[str, float]) -> tuple[dict[str, float], bool]:
    """Min-max normalize; returns (mapping, degenerate).

    A singleton domain normalizes to 0.0; two or more equal values all map
    to 0.5.
    """
    if len(values) == 1:
        return {k: 0.0 for k in values}, True
    lo = min(values.values())
    hi = max(values.values())
    if hi == lo:
        return {k: 0.5 for k in values}, True
    return {k: (v - lo) / (hi - lo) for k, v in values.items()}, False


def calibrate(
    records: list[CalibrationRecord], prior: WeightTable
) -> tuple[WeightTable, list[str]]:
    """Derive type/relation weights and difficulty constants from run logs.

    Type weights are min-max-normalized per-type mean question scores.
    Relation weights invert the normalized per-relation means (a relation
    with low historical scores is hard, so it carries a high complexity
    weight). Statistic weights stay config-supplied. Types or relations
    with zero observations keep their prior weight and are flagged.
    """
    flags: list[str] = []
    if not records:
        raise ValueError("calibration needs at least one record")

    type_scores: dict[str, list[int]] = {}
    relation_scores: dict[str, dict[str, list[int]]] = {}
    raw_relevances: list[float] = []
    qds: list[float] = []
    for rec in records:
        type_scores.setdefault(rec.type_id, []).append(rec.question_score)
        per_type = relation_scores.setdefault(rec.type_id, {})
        for rel in rec.relation_ids:
            per_type.setdefault(rel, []).append(rec.question_score)
        if rec.stats is not None:
            raw_relevances.append(relevance_raw(rec.stats, prior))
        qds.append(rec.q_d)

    type_means = {t: math.fsum(s) / len(s) for t, s in type_scores.items()}
    type_weights, degenerate = _min_max(type_means)
    if degenerate:
        flags.extend(f"type:{t}:insufficient_data" for t in sorted(type_means))
    for t, prior_w in prior.type_weights.items():
        if t not in type_weights:
            type_weights[t] = prior_w
            flags.append(f"type:{t}:no_observations")

    relation_weights: dict[str, dict[str, float]] = {}
    for type_id, per_rel in relation_scores.items():
        means = {r: math.fsum(s) / len(s) for r, s in per_rel.items()}
        normalized, degenerate = _min_max(means)
        relation_weights[type_id] = {r: 1.0 - v for r, v in normalized.items()}
        if degenerate:
            flags.extend(f"relation:{type_id}/{r}:insufficient_data" for r in sorted(means))
    for type_id, prior_rels in prior.relation_weights.items():
        merged = relation_weights.setdefault(type_id, {})
        for rel, prior_w in prior_rels.items():
            if rel not in merged:
                merged[rel] = prior_w
                flags.append(f"relation:{type_id}/{rel}:no_observations")

    bounds = prior.ep_norm_bounds
    if raw_relevances and min(raw_relevances) < max(raw_relevances):
        bounds = (min(raw_relevances), max(raw_relevances))
    else:
        flags.append("ep_norm_bounds:insufficient_data")

    avg_qd = math.fsum(qds) / len(qds)

    table = replace(
        prior,
        type_weights=type_weights,
        relation_weights=relation_weights,
        ep_norm_bounds=bounds,
        avg_qd=avg_qd,
    )
    return table, flags
