"""Valid-type and valid-relation tables.

Both tables are JSON arrays of rows sharing one schema:

    {"type_id": "...", "class": "...", "label": "...", "human": bool,
     "tense": "is"|"was", "valid_relations": ["...", ...]}

The type table supplies class/label/human/tense per type; the relation
table supplies valid_relations per type. Rows merge by type_id. The
shipped defaults are a curated starting set meant to be edited, not ground
truth.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from kgfact.errors import TableValidationError
from kgfact.kg.types import Tense, TypeClass

_CLASS_NAMES = {
    "very_common": TypeClass.VERY_COMMON,
    "common": TypeClass.COMMON,
    "uncommon": TypeClass.UNCOMMON,
}


@dataclass
class TypeEntry:
    type_id: str
    type_class: TypeClass
    label: str
    valid_relations: tuple[str, ...]
    human: bool = False
    tense: Tense = Tense.IS


@dataclass
class TypeClassTable:
    """Merged view over the type and relation tables."""

    entries: dict[str, TypeEntry] = field(default_factory=dict)

    def resolve_class(self, type_id: str) -> TypeClass:
        entry = self.entries.get(type_id)
        return entry.type_class if entry else TypeClass.INVALID

    def is_valid(self, type_id: str) -> bool:
        return type_id in self.entries

    def valid_relations(self, type_id: str) -> frozenset[str]:
        entry = self.entries.get(type_id)
        return frozenset(entry.valid_relations) if entry else frozenset()

    def entry(self, type_id: str) -> TypeEntry | None:
        return self.entries.get(type_id)


def _iter_array_rows(path: Path):
    """Yield (row, line_number) for each element of a JSON array file.

    Elements are decoded one at a time so validation errors can point at
    the exact line the offending row starts on.
    """
    text = path.read_text()
    decoder = json.JSONDecoder()
    pos = text.find("[")
    if pos < 0:
        raise TableValidationError(str(path), 1, "expected a JSON array of rows")
    pos += 1
    while True:
        while pos < len(text) and text[pos] in " \t\r\n,":
            pos += 1
        if pos >= len(text):
            raise TableValidationError(str(path), text.count("\n", 0, pos) + 1, "unterminated array")
        if text[pos] == "]":
            return
        line = text.count("\n", 0, pos) + 1
        try:
            row, pos = decoder.raw_decode(text, pos)
        except json.JSONDecodeError as exc:
            raise TableValidationError(str(path), line, f"invalid JSON: {exc.msg}") from exc
        yield row, line


def _require_str(row: dict, key: str, path: Path, line: int) -> str:
    value = row.get(key)
    if not isinstance(value, str) or not value:
        raise TableValidationError(str(path), line, f"{key!r} must be a non-empty string")
    return value


def load_type_class_table(type_table_path: str | Path, relation_table_path: str | Path) -> TypeClassTable:
    """Load and merge the two tables, failing fast on any bad row."""
    type_path = Path(type_table_path)
    relation_path = Path(relation_table_path)

    classes: dict[str, tuple[TypeClass, str, bool, Tense]] = {}
    for row, line in _iter_array_rows(type_path):
        if not isinstance(row, dict):
            raise TableValidationError(str(type_path), line, "row must be an object")
        type_id = _require_str(row, "type_id", type_path, line)
        if type_id in classes:
            raise TableValidationError(str(type_path), line, f"duplicate type_id {type_id!r}")
        class_name = _require_str(row, "class", type_path, line)
        if class_name not in _CLASS_NAMES:
            raise TableValidationError(
                str(type_path), line, f"class must be one of {sorted(_CLASS_NAMES)}, got {class_name!r}"
            )
        label = _require_str(row, "label", type_path, line)
        human = row.get("human", False)
        if not isinstance(human, bool):
            raise TableValidationError(str(type_path), line, "'human' must be a boolean")
        tense_name = row.get("tense", "is")
        if tense_name not in ("is", "was"):
            raise TableValidationError(str(type_path), line, "'tense' must be 'is' or 'was'")
        classes[type_id] = (_CLASS_NAMES[class_name], label, human, Tense(tense_name))

    relations: dict[str, tuple[str, ...]] = {}
    for row, line in _iter_array_rows(relation_path):
        if not isinstance(row, dict):
            raise TableValidationError(str(relation_path), line, "row must be an object")
        type_id = _require_str(row, "type_id", relation_path, line)
        if type_id in relations:
            raise TableValidationError(str(relation_path), line, f"duplicate type_id {type_id!r}")
        rels = row.get("valid_relations")
        if not isinstance(rels, list) or not rels:
            raise TableValidationError(
                str(relation_path), line, "'valid_relations' must be a non-empty array"
            )
        for rel in rels:
            if not isinstance(rel, str) or not rel:
                raise TableValidationError(
                    str(relation_path), line, "relation ids must be non-empty strings"
                )
        if len(set(rels)) != len(rels):
            raise TableValidationError(str(relation_path), line, "duplicate relation id in row")
        relations[type_id] = tuple(rels)

    table = TypeClassTable()
    for type_id, (type_class, label, human, tense) in classes.items():
        rels = relations.get(type_id)
        if rels is None:
            raise TableValidationError(
                str(relation_path), 1, f"valid type {type_id!r} has no valid_relations row"
            )
        table.entries[type_id] = TypeEntry(
            type_id=type_id,
            type_class=type_class,
            label=label,
            valid_relations=rels,
            human=human,
            tense=tense,
        )
    return table


def default_table_paths() -> tuple[Path, Path]:
    data_dir = Path(__file__).parent / "data"
    return data_dir / "type_table.json", data_dir / "relation_table.json"
