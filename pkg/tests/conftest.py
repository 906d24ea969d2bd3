from __future__ import annotations

import pathlib

import pytest

from modalrel import build_database, load_model

DATA_DIR = pathlib.Path(__file__).parent / "data"
EXAMPLE_MODEL_PATH = DATA_DIR / "example_model.yaml"


@pytest.fixture(scope="session")
def example_model_path() -> pathlib.Path:
    return EXAMPLE_MODEL_PATH


@pytest.fixture(scope="session")
def example_model():
    return load_model(EXAMPLE_MODEL_PATH)


@pytest.fixture(scope="session")
def example_db(example_model):
    return build_database(example_model)
