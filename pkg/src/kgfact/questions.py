"""Question generation: entity prioritization, triple selection, rendering."""

from __future__ import annotations

import logging
import random
import re
from dataclasses import dataclass, replace

from kgfact import prompts
from kgfact.difficulty import WeightTable
from kgfact.errors import MissingBirthDate, TemplateFieldMissing, UnknownType
from kgfact.kg.types import EntityRecord, KGTriple, Tense, TypeClass
from kgfact.tables import TypeClassTable

log = logging.getLogger("kgfact.questions")

BIRTH_RELATION = "P569"
DEATH_RELATION = "P570"

# Less common entities first: they are the productive part of a sample,
# while very common ones dominate raw draws.
_CLASS_PRIORITY = {TypeClass.UNCOMMON: 0, TypeClass.COMMON: 1, TypeClass.VERY_COMMON: 2}

_YEAR_RE = re.compile(r"\d{4}")


@dataclass(frozen=True)
class QuestionSpec:
    """A fully rendered benchmark question and its difficulty inputs."""

    focal: EntityRecord
    triples: tuple[KGTriple, KGTriple, KGTriple]
    supplementary_context: str
    prompt_text: str
    relation_weights: tuple[float, float, float]
    question_index: int

    def __post_init__(self):
        if len(self.triples) != 3:
            raise TemplateFieldMissing("a question needs exactly 3 triples")
        relation_ids = {t.relation_id for t in self.triples}
        if len(relation_ids) != 3:
            raise TemplateFieldMissing("triples must have pairwise distinct relations")
        if not all(0.0 <= w <= 1.0 for w in self.relation_weights):
            raise TemplateFieldMissing("relation weights must be in [0, 1]")
        for needle, what in [
            (self.focal.label, "entity label"),
            (self.supplementary_context, "supplementary context"),
            *((t.relation_label.lower(), "relation label") for t in self.triples),
        ]:
            count = self.prompt_text.count(needle) if needle else 0
            if count != 1:
                raise TemplateFieldMissing(
                    f"{what} {needle!r} appears {count} times in the prompt, expected once"
                )


def filter_and_prioritize(batch: list[EntityRecord]) -> list[EntityRecord]:
    """Drop invalid-type records; order Uncommon, Common, VeryCommon, stably."""
    valid = [r for r in batch if r.type_class is not TypeClass.INVALID]
    return sorted(valid, key=lambda r: _CLASS_PRIORITY[r.type_class])


def select_valid_triples(
    entity: EntityRecord,
    triples: list[KGTriple],
    rng_seed: int,
    table: TypeClassTable,
) -> list[KGTriple] | None:
    """Three distinct valid relations, seeded-uniformly; None when too few.

    Candidates are textual triples whose relation the type table allows;
    a multi-valued relation contributes its first triple in subgraph order.
    """
    allowed = table.valid_relations(entity.type_id)
    seen: dict[str, KGTriple] = {}
    for triple in triples:
        if not triple.textual or triple.relation_id not in allowed:
            continue
        seen.setdefault(triple.relation_id, triple)
    if len(seen) < 3:
        return None
    candidates = list(seen.values())
    random.Random(rng_seed).shuffle(candidates)
    chosen = candidates[:3]
    tense = entity_tense(entity, triples, table)
    return [replace(t, tense_indicator=tense) for t in chosen]


def entity_tense(entity: EntityRecord, triples: list[KGTriple], table: TypeClassTable) -> Tense:
    """Humans with a death date take 'was'; otherwise the type's default."""
    entry = table.entry(entity.type_id)
    if entry is None:
        raise UnknownType(f"type {entity.type_id!r} is not in the type table")
    if entry.human and any(t.relation_id == DEATH_RELATION for t in triples):
        return Tense.WAS
    return entry.tense


def _year_of(triples: list[KGTriple], relation_id: str) -> str | None:
    for t in triples:
        if t.relation_id == relation_id:
            match = _YEAR_RE.search(t.fact_value)
            if match:
                return match.group()
    return None


def build_supplementary_context(
    entity: EntityRecord, triples: list[KGTriple], table: TypeClassTable
) -> str:
    """Lifespan for humans, the lowercase type name for everything else."""
    entry = table.entry(entity.type_id)
    if entry is None:
        raise UnknownType(f"type {entity.type_id!r} is not in the type table")
    if not entry.human:
        return f"({entry.label.lower()})"
    birth = _year_of(triples, BIRTH_RELATION)
    if birth is None:
        raise MissingBirthDate(f"{entity.entity_id} has no parseable birth date")
    death = _year_of(triples, DEATH_RELATION)
    return f"({birth}–{death})" if death else f"({birth}–)"


def render_question(
    entity_label: str, supplementary_context: str, relation_labels: tuple[str, str, str]
) -> str:
    """The fixed compound-question template; relation labels render lowercase."""
    if not entity_label or not supplementary_context or not all(relation_labels):
        raise TemplateFieldMissing("all template fields must be non-empty")
    return prompts.QUESTION_TEMPLATE.format(
        entity_name=entity_label,
        supplementary_context=supplementary_context,
        relation_1=relation_labels[0].lower(),
        relation_2=relation_labels[1].lower(),
        relation_3=relation_labels[2].lower(),
    )


def build_question_spec(
    entity: EntityRecord,
    subgraph: list[KGTriple],
    table: TypeClassTable,
    weights: WeightTable,
    rng_seed: int,
    question_index: int,
) -> QuestionSpec | None:
    """Assemble a QuestionSpec from a focal entity; None when it lacks triples."""
    chosen = select_valid_triples(entity, subgraph, rng_seed, table)
    if chosen is None:
        return None
    context = build_supplementary_context(entity, subgraph, table)
    prompt_text = render_question(
        entity.label,
        context,
        (chosen[0].relation_label, chosen[1].relation_label, chosen[2].relation_label),
    )
    relation_weights = []
    for t in chosen:
        weight = weights.relation_weights.get(entity.type_id, {}).get(t.relation_id)
        if weight is None:
            log.warning(
                "no calibrated weight for %s/%s; using 0.5", entity.type_id, t.relation_id
            )
            weight = 0.5
        relation_weights.append(weight)
    return QuestionSpec(
        focal=entity,
        triples=(chosen[0], chosen[1], chosen[2]),
        supplementary_context=context,
        prompt_text=prompt_text,
        relation_weights=(relation_weights[0], relation_weights[1], relation_weights[2]),
        question_index=question_index,
    )
