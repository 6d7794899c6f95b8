"""Shared fixtures: seeded RNG, bundled config, small datasets, synthetic fixtures."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from lib.campaign import Workspace
from lib.config import Settings, load_category_vocabulary, load_gender_map
from lib.ingestion import dataset_from_payload
from lib.synth import SynthSpec, generate, write_fixture
from lib.textindex import TokenizerConfig


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def tokenizer() -> TokenizerConfig:
    return TokenizerConfig.default()


@pytest.fixture(scope="session")
def vocabulary():
    return load_category_vocabulary()


@pytest.fixture(scope="session")
def gender_map():
    return load_gender_map()


@pytest.fixture
def small_payload() -> dict:
    return {
        "users": [
            {"owner_id": "u1", "gender": "Female", "age": "17", "education": "liceo classico",
             "posts": ["Ciao mondo! pizza e gelato", "gelato al cioccolato"]},
            {"owner_id": "u2", "gender": "M", "age": 35, "job": "ingegnere meccanico",
             "posts": ["motori e calcio", "calcio calcio motori"]},
            {"owner_id": "u3", "gender": "donna", "age": 16, "location": "Roma",
             "posts": ["gelato e pizza con amici"]},
        ],
        "pages": [
            {"owner_id": "p_gelato", "kind": "brand_page", "gender": "f", "age": 17,
             "posts": ["il nostro gelato", "pizza e gelato per tutti"],
             "page_meta": {"name": "Gelateria", "topics": ["food"], "follow_count": "2.7M",
                           "category": "company"}},
            {"owner_id": "p_motori", "kind": "brand_page",
             "posts": ["motori da corsa", "calcio e motori"],
             "page_meta": {"name": "Motori", "follow_count": 910, "category": "community"}},
        ],
    }


@pytest.fixture
def small_dataset(small_payload, gender_map, tokenizer):
    return dataset_from_payload(small_payload, gender_map, tokenizer)


@pytest.fixture
def small_workspace(small_dataset, vocabulary, tokenizer) -> Workspace:
    return Workspace.build(small_dataset, vocabulary, tokenizer, Settings())


def write_payload(path: Path, payload) -> Path:
    path.write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")
    return path


@pytest.fixture
def dataset_file(tmp_path, small_payload) -> Path:
    return write_payload(tmp_path / "raw.json", small_payload)


@pytest.fixture(scope="session")
def synth_300(tmp_path_factory):
    """Two-cluster fixture, 300 users, written to disk once per session."""
    fx = generate(SynthSpec(users=300), seed=7)
    out = tmp_path_factory.mktemp("synth300")
    write_fixture(fx, out)
    return fx, out


@pytest.fixture(scope="session")
def synth_300_workspace(synth_300):
    fx, _ = synth_300
    tokenizer = TokenizerConfig.default()
    dataset = dataset_from_payload(fx.dataset, load_gender_map(), tokenizer)
    return Workspace.build(dataset, load_category_vocabulary(), tokenizer, Settings())
