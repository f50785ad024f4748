"""
Хранилище для тестов: синтетическая фикстура с фиксированным сидом
"""

import tempfile
from pathlib import Path

from .config import StoreConfig
from .fixtures import make_fixture
from .ingestion import build_proximity_pairs, ingest_fixture
from .store import GeoStore


def build_test_store(
    cities=("Guangzhou", "Shenzhen"),
    communities: int = 60,
    pois: int = 52,
    seed: int = 7,
) -> GeoStore:
    config = StoreConfig(
        cities=cities,
        fixture_seed=seed,
        communities_per_city=communities,
        pois_per_city=pois,
    )
    with tempfile.TemporaryDirectory() as directory:
        make_fixture(config, Path(directory))
        store = ingest_fixture(config, Path(directory))
    build_proximity_pairs(config)
    return store
