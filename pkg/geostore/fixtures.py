"""
Синтетические фикстуры: точки, сгруппированные вокруг районов города
"""

import csv
import logging
import random
from collections import defaultdict
from math import cos, radians, sin, pi
from pathlib import Path

from django.conf import settings

from domain.geo import GeoPoint
from .config import StoreConfig
from .tables import city_slug


logger = logging.getLogger(__name__)

COMMUNITY_COLUMNS = [
    "id",
    "name",
    "district",
    "address",
    "latitude",
    "longitude",
    "greening_rate",
    "avg_price",
    "property_type",
    "sales_status",
]
POI_COLUMNS = ["id", "name", "category", "label", "latitude", "longitude"]

NAME_PREFIXES = [
    "Lotus", "Jade", "Pearl", "Maple", "Cedar", "Harbor", "Sunrise", "Willow",
    "Orchid", "Bamboo", "Crystal", "Golden", "Silver", "Riverside", "Lakeview",
    "Hillside", "Phoenix", "Ocean", "Spring", "Autumn",
]
NAME_SUFFIXES = [
    "Garden", "Court", "Residence", "Mansion", "Terrace",
    "Heights", "Manor", "Square", "Bay", "Plaza",
]
STREETS = ["Zhongshan", "Jiefang", "Renmin", "Binjiang", "Huanshi", "Xinhua", "Jianshe", "Dongfeng"]

DISTRICT_RING = 6000.0  # метры от центра города до центров районов
COMMUNITY_SPREAD = 1200.0
POI_SPREAD = 1500.0
METERS_PER_DEGREE = 111_320.0


def fixture_path(directory: Path, family: str, city: str) -> Path:
    return Path(directory) / f"{family}_{city_slug(city)}.csv"


def _shift(origin: GeoPoint, east: float, north: float) -> GeoPoint:
    latitude = origin.latitude + north / METERS_PER_DEGREE
    longitude = origin.longitude + east / (METERS_PER_DEGREE * cos(radians(origin.latitude)))
    return GeoPoint(latitude, longitude).rounded()


def _district_centers(center: GeoPoint, districts: list[str]) -> dict[str, GeoPoint]:
    step = 2 * pi / len(districts)
    return {
        district: _shift(center, DISTRICT_RING * cos(index * step), DISTRICT_RING * sin(index * step))
        for index, district in enumerate(districts)
    }


def _community_names(rng: random.Random, count: int) -> list[str]:
    names = [f"{prefix} {suffix}" for prefix in NAME_PREFIXES for suffix in NAME_SUFFIXES]
    rng.shuffle(names)
    phase = 2
    base = list(names)
    while len(names) < count:
        names.extend(f"{name} Phase {phase}" for name in base)
        phase += 1
    return names[:count]


def synthesize_city(city: str, config: StoreConfig) -> tuple[list[dict], list[dict]]:
    """
    Строит строки комплексов и POI одного города

    Raises:
        ValueError: город не описан в CITY_PROFILES
    """

    try:
        profile = settings.CITY_PROFILES[city]
    except KeyError:
        raise ValueError(f"city {city!r} has no profile in CITY_PROFILES") from None

    rng = random.Random(f"{config.fixture_seed}:{city}")
    slug = city_slug(city)
    districts = list(profile["districts"])
    centers = _district_centers(GeoPoint(*profile["center"]), districts)
    base_prices = {district: rng.randint(25, 70) * 1000 for district in districts}

    communities = []
    for index, name in enumerate(_community_names(rng, config.communities_per_city)):
        district = districts[index % len(districts)]
        point = _shift(
            centers[district], rng.gauss(0, COMMUNITY_SPREAD), rng.gauss(0, COMMUNITY_SPREAD)
        )
        communities.append(
            {
                "id": f"{slug}-c{index:04d}",
                "name": name,
                "district": district,
                "address": f"{rng.randint(1, 999)} {rng.choice(STREETS)} Road, {district}",
                "latitude": point.latitude,
                "longitude": point.longitude,
                "greening_rate": round(rng.uniform(20, 45), 1),
                "avg_price": max(8000, base_prices[district] + rng.randint(-16, 16) * 500),
                "property_type": rng.choices(settings.PROPERTY_TYPES, weights=[6, 1, 2, 1])[0],
                "sales_status": rng.choice(settings.SALES_STATUSES),
            }
        )

    labels = [
        (category, label)
        for category, category_labels in settings.POI_TAXONOMY.items()
        for label in category_labels
    ]
    numbering = defaultdict(int)
    pois = []
    for index in range(config.pois_per_city):
        category, label = labels[index % len(labels)]
        district = districts[(index // len(labels)) % len(districts)]
        numbering[(district, label)] += 1
        point = _shift(centers[district], rng.gauss(0, POI_SPREAD), rng.gauss(0, POI_SPREAD))
        pois.append(
            {
                "id": f"{slug}-p{index:04d}",
                "name": f"{district} No.{numbering[(district, label)]} {label.title()}",
                "category": category,
                "label": label,
                "latitude": point.latitude,
                "longitude": point.longitude,
            }
        )
    return communities, pois


def _write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    with path.open("w", encoding="utf-8", newline="") as stream:
        writer = csv.DictWriter(stream, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)


def make_fixture(config: StoreConfig, directory: Path) -> dict[str, tuple[int, int]]:
    """
    Пишет community_<город>.csv и poi_<город>.csv для каждого города

    Returns:
        Город -> (число комплексов, число POI)
    """

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    counts = {}
    for city in config.cities:
        communities, pois = synthesize_city(city, config)
        _write_csv(fixture_path(directory, "community", city), COMMUNITY_COLUMNS, communities)
        _write_csv(fixture_path(directory, "poi", city), POI_COLUMNS, pois)
        counts[city] = (len(communities), len(pois))
        logger.info("fixture for %s: %d communities, %d POIs", city, *counts[city])
    return counts
