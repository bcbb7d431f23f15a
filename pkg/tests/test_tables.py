"""Type/relation table loading and line-precise validation errors."""

from __future__ import annotations

import json

import pytest

from kgfact.errors import TableValidationError
from kgfact.kg.types import Tense, TypeClass
from kgfact.tables import default_table_paths, load_type_class_table

VALID_TYPES = [
    {"type_id": "Q1", "class": "uncommon", "label": "Widget"},
    {"type_id": "Q2", "class": "very_common", "label": "Person", "human": True, "tense": "is"},
]
VALID_RELATIONS = [
    {"type_id": "Q1", "valid_relations": ["P1", "P2", "P3"]},
    {"type_id": "Q2", "valid_relations": ["P569", "P570"]},
]


@pytest.fixture
def table_files(tmp_path):
    def _write(types=VALID_TYPES, relations=VALID_RELATIONS, type_text=None, relation_text=None):
        type_path = tmp_path / "types.json"
        relation_path = tmp_path / "relations.json"
        type_path.write_text(type_text if type_text is not None else json.dumps(types, indent=2))
        relation_path.write_text(
            relation_text if relation_text is not None else json.dumps(relations, indent=2)
        )
        return type_path, relation_path

    return _write


class TestLoading:
    def test_merges_both_tables(self, table_files):
        table = load_type_class_table(*table_files())
        entry = table.entry("Q1")
        assert entry.type_class is TypeClass.UNCOMMON
        assert entry.label == "Widget"
        assert entry.valid_relations == ("P1", "P2", "P3")
        assert entry.human is False
        assert entry.tense is Tense.IS

    def test_human_flag_and_defaults(self, table_files):
        table = load_type_class_table(*table_files())
        assert table.entry("Q2").human is True

    def test_resolve_class_of_unknown_type_is_invalid(self, table_files):
        table = load_type_class_table(*table_files())
        assert table.resolve_class("Q999") is TypeClass.INVALID
        assert not table.is_valid("Q999")
        assert table.valid_relations("Q999") == frozenset()
        assert table.entry("Q999") is None

    def test_packaged_defaults_load(self):
        table = load_type_class_table(*default_table_paths())
        assert len(table.entries) == 10
        human_entry = table.entry("Q5")
        assert human_entry.human and human_entry.type_class is TypeClass.VERY_COMMON
        for entry in table.entries.values():
            assert entry.valid_relations


class TestTypeTableErrors:
    def error(self, table_files, **kwargs) -> TableValidationError:
        with pytest.raises(TableValidationError) as exc:
            load_type_class_table(*table_files(**kwargs))
        return exc.value

    def test_non_array_file(self, table_files):
        err = self.error(table_files, type_text='{"not": "an array"}')
        assert err.line == 1
        assert "array" in err.message

    def test_row_not_an_object(self, table_files):
        err = self.error(table_files, type_text='[\n"just a string"\n]')
        assert err.line == 2

    def test_duplicate_type_id_reports_second_row_line(self, table_files):
        rows = [VALID_TYPES[0], dict(VALID_TYPES[0])]
        text = json.dumps(rows, indent=2)
        err = self.error(table_files, type_text=text)
        assert "duplicate type_id" in err.message
        lines = text.split("\n")
        second_row_line = lines.index("  {", lines.index("  {") + 1) + 1
        assert err.line == second_row_line

    def test_unknown_class_name(self, table_files):
        bad = [{"type_id": "Q1", "class": "legendary", "label": "X"}]
        err = self.error(table_files, types=bad)
        assert "legendary" in err.message

    def test_missing_label(self, table_files):
        err = self.error(table_files, types=[{"type_id": "Q1", "class": "common"}])
        assert "'label'" in err.message

    def test_non_boolean_human(self, table_files):
        bad = [{"type_id": "Q1", "class": "common", "label": "X", "human": "yes"}]
        err = self.error(table_files, types=bad)
        assert "human" in err.message

    def test_bad_tense(self, table_files):
        bad = [{"type_id": "Q1", "class": "common", "label": "X", "tense": "will be"}]
        err = self.error(table_files, types=bad)
        assert "tense" in err.message

    def test_invalid_json_row_names_line(self, table_files):
        err = self.error(table_files, type_text='[\n{"type_id": }\n]')
        assert err.line == 2
        assert "invalid JSON" in err.message


class TestRelationTableErrors:
    def error(self, table_files, **kwargs) -> TableValidationError:
        with pytest.raises(TableValidationError) as exc:
            load_type_class_table(*table_files(**kwargs))
        return exc.value

    def test_empty_relations(self, table_files):
        bad = [{"type_id": "Q1", "valid_relations": []}, VALID_RELATIONS[1]]
        err = self.error(table_files, relations=bad)
        assert "non-empty array" in err.message

    def test_duplicate_relation_in_row(self, table_files):
        bad = [{"type_id": "Q1", "valid_relations": ["P1", "P1", "P2"]}, VALID_RELATIONS[1]]
        err = self.error(table_files, relations=bad)
        assert "duplicate relation" in err.message

    def test_non_string_relation(self, table_files):
        bad = [{"type_id": "Q1", "valid_relations": ["P1", 7]}, VALID_RELATIONS[1]]
        err = self.error(table_files, relations=bad)
        assert "non-empty strings" in err.message

    def test_type_without_relations_row(self, table_files):
        err = self.error(table_files, relations=[VALID_RELATIONS[0]])
        assert "Q2" in err.message and "no valid_relations" in err.message

    def test_duplicate_type_row(self, table_files):
        bad = VALID_RELATIONS + [dict(VALID_RELATIONS[0])]
        err = self.error(table_files, relations=bad)
        assert "duplicate type_id" in err.message

    def test_error_carries_path(self, table_files, tmp_path):
        err = self.error(table_files, relations=[VALID_RELATIONS[0]])
        assert err.path == str(tmp_path / "relations.json")
