"""Domain types for knowledge-graph access."""

from __future__ import annotations

from dataclasses import dataclass, fields
from enum import Enum


class TypeClass(str, Enum):
    """KG frequency class of an entity type."""

    VERY_COMMON = "very_common"
    COMMON = "common"
    UNCOMMON = "uncommon"
    INVALID = "invalid"


class Tense(str, Enum):
    """Auxiliary verb used when rendering a triple as a sentence."""

    IS = "is"
    WAS = "was"


# Statistic field order is part of the contract: weight vectors and
# log-normalized vectors follow this order everywhere.
STATISTIC_FIELDS = (
    "page_views",
    "site_links",
    "linked_entities",
    "external_ids",
    "wiki_token_count",
    "statements",
    "references",
)


@dataclass(frozen=True)
class EntityStatistics:
    """Complete popularity statistics for one entity.

    A partial statistics value is never constructed: absence is represented
    at the EntityRecord level (statistics=None), and the client returns the
    INCOMPLETE sentinel instead when any source value is null or invalid.
    """

    page_views: int
    site_links: int
    linked_entities: int
    external_ids: int
    wiki_token_count: int
    statements: int
    references: int

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None or value < 0:
                raise ValueError(f"statistic {f.name} must be a non-negative count, got {value!r}")

    def as_vector(self) -> tuple[int, ...]:
        return tuple(getattr(self, name) for name in STATISTIC_FIELDS)


class _Incomplete:
    """Sentinel: statistics could not be fully resolved for this entity."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INCOMPLETE"


INCOMPLETE = _Incomplete()


@dataclass
class EntityRecord:
    """A KG entity as the pipeline sees it.

    statistics and description start absent and are filled in by later
    fetch stages; type_class is INVALID exactly when type_id is not in the
    configured valid-type table.
    """

    entity_id: str
    type_id: str
    type_class: TypeClass
    label: str = ""
    statistics: EntityStatistics | None = None
    description: str | None = None

    def __post_init__(self):
        if not self.entity_id:
            raise ValueError("entity_id must be non-empty")


@dataclass(frozen=True)
class KGTriple:
    """One (relation, fact) pair on the focal entity.

    textual is False when the object entity had no label and fact_value is
    its raw identifier; such triples are excluded from question selection.
    """

    relation_id: str
    relation_label: str
    fact_value: str
    tense_indicator: Tense = Tense.IS
    textual: bool = True

    def __post_init__(self):
        if not self.fact_value:
            raise ValueError("fact_value must be non-empty after rendering")
