"""Shared fixtures for the harness test suite."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from mockcfg import CORPUS_PATH, base_config

from kgfact.config import build_runtime, load_run_config

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def corpus_path() -> Path:
    return CORPUS_PATH


@pytest.fixture
def write_config(tmp_path):
    """Write a config dict as JSON under tmp_path and return its path."""

    def _write(config: dict, name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(config, indent=2), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def mock_runtime(tmp_path, write_config):
    """A ready-to-run mock runtime writing into tmp_path/out."""
    config = base_config(tmp_path / "out")
    return build_runtime(load_run_config(write_config(config)))
