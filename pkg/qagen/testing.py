"""
Сгенерированный датасет для тестов поверх синтетического хранилища
"""

from django.conf import settings

from geostore.testing import build_test_store
from toolcache.providers import SyntheticProvider
from toolcache.service import ToolCache
from .generation import generate_dataset
from .templates import load_catalog


def build_test_dataset(
    cities=("Guangzhou", "Shenzhen"),
    attempts: int = 12,
    seed: int = 2024,
    communities: int = 60,
    pois: int = 130,
):
    """
    Returns:
        (хранилище, каталог шаблонов, экземпляры, отчёт генерации)
    """

    store = build_test_store(cities=cities, communities=communities, pois=pois)
    templates = load_catalog(settings.QA_TEMPLATE_DIR)
    instances, report = generate_dataset(
        templates.values(),
        store,
        ToolCache(provider=SyntheticProvider()),
        cities=tuple(cities),
        seed=seed,
        attempts=attempts,
    )
    return store, templates, instances, report
