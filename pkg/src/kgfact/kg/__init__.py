from kgfact.kg.types import (
    INCOMPLETE,
    EntityRecord,
    EntityStatistics,
    KGTriple,
    Tense,
    TypeClass,
)
from kgfact.kg.client import KgClient, KgEndpoints

__all__ = [
    "INCOMPLETE",
    "EntityRecord",
    "EntityStatistics",
    "KGTriple",
    "KgClient",
    "KgEndpoints",
    "Tense",
    "TypeClass",
]
