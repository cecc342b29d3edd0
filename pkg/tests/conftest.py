from __future__ import annotations

from pathlib import Path

import pytest

from apimention.classifier import load_model
from apimention.db import load_database
from apimention.text import load_thread, preprocess_thread

FIXTURES = Path(__file__).parent / "fixtures"
SCENARIOS = FIXTURES / "threads"
AMBIGUITY = FIXTURES / "ambiguity"
GOLDEN = FIXTURES / "golden"


@pytest.fixture(scope="session")
def small_db():
    return load_database(FIXTURES / "small_db.jsonl")


@pytest.fixture(scope="session")
def extended_db():
    return load_database(FIXTURES / "extended_db.jsonl")


@pytest.fixture(scope="session")
def model():
    return load_model(FIXTURES / "model.json")


def scenario(name: str):
    return load_thread(SCENARIOS / f"{name}.json")


def thread(*bodies: str, title: str = "", thread_id: str = "t"):
    """Small in-memory thread; post ids are p1, p2, ..."""
    return preprocess_thread({"thread_id": thread_id, "title": title, "posts": [{"body": b} for b in bodies]})
