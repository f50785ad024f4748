"""
Семейства таблиц: имена представлений, подписи и схемы колонок
"""

import re


FAMILIES = ("community", "poi", "poi_community", "community_community")

CAPTION_PATTERNS = {
    "community": "Table for Communities in {city}",
    "poi": "Table for POIs in {city}",
    "poi_community": "Table for Communities around POIs in {city}",
    "community_community": "Table for Neighboring Communities in {city}",
}

FAMILY_COLUMNS = {
    "community": [
        ("id", "TEXT"),
        ("name", "TEXT"),
        ("district", "TEXT"),
        ("address", "TEXT"),
        ("latitude", "REAL"),
        ("longitude", "REAL"),
        ("greening_rate", "REAL"),
        ("avg_price", "INTEGER"),
        ("property_type", "TEXT"),
        ("sales_status", "TEXT"),
    ],
    "poi": [
        ("id", "TEXT"),
        ("name", "TEXT"),
        ("category", "TEXT"),
        ("label", "TEXT"),
        ("latitude", "REAL"),
        ("longitude", "REAL"),
    ],
    "poi_community": [
        ("poi_id", "TEXT"),
        ("poi_name", "TEXT"),
        ("poi_label", "TEXT"),
        ("community_id", "TEXT"),
        ("community_name", "TEXT"),
        ("straight_distance", "INTEGER"),
    ],
    "community_community": [
        ("community_id", "TEXT"),
        ("community_name", "TEXT"),
        ("neighbor_id", "TEXT"),
        ("neighbor_name", "TEXT"),
        ("straight_distance", "INTEGER"),
    ],
}

_VIEW_BODIES = {
    "community": (
        "SELECT community_id AS id, name, district, address, latitude, longitude, "
        "greening_rate, avg_price, property_type, sales_status "
        "FROM geostore_community WHERE city = {city}"
    ),
    "poi": (
        "SELECT poi_id AS id, name, category, label, latitude, longitude "
        "FROM geostore_poi WHERE city = {city}"
    ),
    "poi_community": (
        "SELECT p.poi_id AS poi_id, p.name AS poi_name, p.label AS poi_label, "
        "c.community_id AS community_id, c.name AS community_name, "
        "pair.straight_distance AS straight_distance "
        "FROM geostore_poicommunitypair AS pair "
        "JOIN geostore_poi AS p ON p.id = pair.poi_id "
        "JOIN geostore_community AS c ON c.id = pair.community_id "
        "WHERE pair.city = {city}"
    ),
    "community_community": (
        "SELECT c.community_id AS community_id, c.name AS community_name, "
        "n.community_id AS neighbor_id, n.name AS neighbor_name, "
        "pair.straight_distance AS straight_distance "
        "FROM geostore_communitypair AS pair "
        "JOIN geostore_community AS c ON c.id = pair.community_id "
        "JOIN geostore_community AS n ON n.id = pair.neighbor_id "
        "WHERE pair.city = {city}"
    ),
}


def city_slug(city: str) -> str:
    """Guangzhou -> guangzhou, Hong Kong -> hong_kong"""
    return re.sub(r"[^0-9a-z]+", "_", city.lower()).strip("_")


def quote_literal(value) -> str:
    """Строковый литерал SQLite"""
    return "'" + str(value).replace("'", "''") + "'"


def table_name(family: str, city: str) -> str:
    if family not in FAMILIES:
        raise ValueError(f"unknown table family {family!r}")
    return f"{family}_{city_slug(city)}"


def caption_text(family: str, city: str) -> str:
    return CAPTION_PATTERNS[family].format(city=city)


def view_sql(family: str, city: str) -> str:
    body = _VIEW_BODIES[family].format(city=quote_literal(city))
    return f"CREATE VIEW {table_name(family, city)} AS {body}"


def schema_text(family: str, city: str) -> str:
    """Схема таблицы в виде, который подставляется в промпты"""
    columns = ", ".join(f"{name} {kind}" for name, kind in FAMILY_COLUMNS[family])
    return f"{table_name(family, city)}({columns})"
