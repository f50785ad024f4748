"""
Загрузка фикстур, построение пар близости и каталога подписей
"""

import csv
import logging
from pathlib import Path

from django.db import connection, transaction

from domain.geo import GeoPoint, haversine
from .config import StoreConfig
from .exceptions import IngestionError
from .fixtures import fixture_path
from .models import Community, CommunityPair, Poi, PoiCommunityPair, TableCaption
from .serializers import CommunityRowSerializer, PoiRowSerializer
from .store import GeoStore
from .tables import FAMILIES, FAMILY_COLUMNS, caption_text, table_name, view_sql


logger = logging.getLogger(__name__)


def _read_rows(path: Path, serializer_class) -> list[tuple[int, dict]]:
    if not path.exists():
        raise IngestionError(str(path), 0, "fixture file is missing")
    rows = []
    with path.open(encoding="utf-8", newline="") as stream:
        reader = csv.DictReader(stream)
        # строка 1 - заголовок
        for line, record in enumerate(reader, start=2):
            serializer = serializer_class(data=record)
            if not serializer.is_valid():
                raise IngestionError(str(path), line, dict(serializer.errors))
            rows.append((line, serializer.validated_data))
    return rows


def _check_unique(path: Path, rows: list[tuple[int, dict]], seen: set) -> None:
    for line, row in rows:
        if row["id"] in seen:
            raise IngestionError(str(path), line, f"duplicate id {row['id']!r}")
        seen.add(row["id"])


def create_views(cities) -> None:
    """Пересоздаёт SQL-представления четырёх семейств для каждого города"""

    with connection.cursor() as cursor:
        for city in cities:
            for family in FAMILIES:
                cursor.execute(f"DROP VIEW IF EXISTS {table_name(family, city)}")
                cursor.execute(view_sql(family, city))


def rebuild_captions() -> int:
    """Каталог подписей для всех городов хранилища в порядке (город, семейство)"""

    cities = sorted(
        set(Community.objects.values_list("city", flat=True))
        | set(Poi.objects.values_list("city", flat=True))
        | set(TableCaption.objects.values_list("city", flat=True))
    )
    TableCaption.objects.all().delete()
    captions = []
    for city in cities:
        for family in FAMILIES:
            captions.append(
                TableCaption(
                    table_id=table_name(family, city),
                    caption=caption_text(family, city),
                    city=city,
                    family=family,
                    columns=[name for name, _ in FAMILY_COLUMNS[family]],
                    position=len(captions),
                )
            )
    TableCaption.objects.bulk_create(captions)
    return len(captions)


@transaction.atomic
def ingest_fixture(config: StoreConfig, source: Path) -> GeoStore:
    """
    Загружает фикстуры городов из каталога source

    Данные городов из config заменяются целиком

    Raises:
        IngestionError: строка не прошла проверку или файла нет
    """

    source = Path(source)
    parsed = {}
    seen_communities, seen_pois = set(), set()
    for city in config.cities:
        community_file = fixture_path(source, "community", city)
        poi_file = fixture_path(source, "poi", city)
        communities = _read_rows(community_file, CommunityRowSerializer)
        pois = _read_rows(poi_file, PoiRowSerializer)
        _check_unique(community_file, communities, seen_communities)
        _check_unique(poi_file, pois, seen_pois)
        parsed[city] = (communities, pois)

    conflicts = (
        Community.objects.exclude(city__in=config.cities)
        .filter(community_id__in=seen_communities)
        .exists()
        or Poi.objects.exclude(city__in=config.cities).filter(poi_id__in=seen_pois).exists()
    )
    if conflicts:
        raise IngestionError(str(source), 0, "ids collide with another city already in the store")

    Community.objects.filter(city__in=config.cities).delete()
    Poi.objects.filter(city__in=config.cities).delete()
    for city, (communities, pois) in parsed.items():
        Community.objects.bulk_create(
            Community(
                community_id=row["id"],
                city=city,
                name=row["name"],
                district=row["district"],
                address=row["address"],
                latitude=row["latitude"],
                longitude=row["longitude"],
                greening_rate=row["greening_rate"],
                avg_price=row["avg_price"],
                property_type=row["property_type"],
                sales_status=row["sales_status"],
            )
            for _, row in communities
        )
        Poi.objects.bulk_create(
            Poi(
                poi_id=row["id"],
                city=city,
                name=row["name"],
                category=row["category"],
                label=row["label"],
                latitude=row["latitude"],
                longitude=row["longitude"],
            )
            for _, row in pois
        )
        logger.info("ingested %s: %d communities, %d POIs", city, len(communities), len(pois))

    create_views(config.cities)
    total = rebuild_captions()
    logger.info("caption catalog holds %d tables", total)
    return GeoStore(config)


@transaction.atomic
def build_proximity_pairs(config: StoreConfig) -> dict[str, int]:
    """
    Пересчитывает пары близости для городов конфигурации

    В пару попадают сущности на точном расстоянии не больше радиуса,
    хранится расстояние, округлённое до метра

    Returns:
        Число строк по видам пар
    """

    counts = {"poi_community": 0, "community_community": 0}
    for city in config.cities:
        PoiCommunityPair.objects.filter(city=city).delete()
        CommunityPair.objects.filter(city=city).delete()
        communities = [
            (item, GeoPoint(item.latitude, item.longitude))
            for item in Community.objects.filter(city=city).order_by("community_id")
        ]
        pois = [
            (item, GeoPoint(item.latitude, item.longitude))
            for item in Poi.objects.filter(city=city).order_by("poi_id")
        ]

        poi_pairs = []
        for poi, poi_point in pois:
            for community, community_point in communities:
                distance = haversine(poi_point, community_point)
                if distance <= config.poi_pairing_radius:
                    poi_pairs.append(
                        PoiCommunityPair(
                            city=city,
                            poi=poi,
                            community=community,
                            straight_distance=round(distance),
                        )
                    )

        community_pairs = []
        for index, (left, left_point) in enumerate(communities):
            for right, right_point in communities[index + 1:]:
                distance = haversine(left_point, right_point)
                if distance <= config.community_pairing_radius:
                    rounded = round(distance)
                    community_pairs.append(
                        CommunityPair(city=city, community=left, neighbor=right, straight_distance=rounded)
                    )
                    community_pairs.append(
                        CommunityPair(city=city, community=right, neighbor=left, straight_distance=rounded)
                    )

        PoiCommunityPair.objects.bulk_create(poi_pairs, batch_size=2000)
        CommunityPair.objects.bulk_create(community_pairs, batch_size=2000)
        counts["poi_community"] += len(poi_pairs)
        counts["community_community"] += len(community_pairs)
        logger.info(
            "pairs for %s: %d poi_community, %d community_community",
            city,
            len(poi_pairs),
            len(community_pairs),
        )
    return counts
