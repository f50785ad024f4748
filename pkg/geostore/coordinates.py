"""
Извлечение координат из результата SQL по соглашениям об именах колонок
"""

from typing import Optional, Sequence

from django.conf import settings

from domain.geo import GeoPoint


def _find_column(columns: Sequence[str], candidates: Sequence[str]) -> Optional[int]:
    lowered = [column.lower() for column in columns]
    for candidate in candidates:
        if candidate in lowered:
            return lowered.index(candidate)
    return None


def extract_coordinates(columns: Sequence[str], rows: Sequence[Sequence]) -> dict[str, GeoPoint]:
    """
    Строит карту имя -> точка по тройке колонок (имя, широта, долгота)

    Ключи карты - различные значения колонки имени; при повторе имени
    берётся первая строка. Без одной из трёх колонок карта пуста
    """

    conventions = settings.COORDINATE_COLUMNS
    name_index = _find_column(columns, conventions["name"])
    lat_index = _find_column(columns, conventions["latitude"])
    lon_index = _find_column(columns, conventions["longitude"])
    if name_index is None or lat_index is None or lon_index is None:
        return {}

    found: dict[str, GeoPoint] = {}
    for row in rows:
        name = row[name_index]
        if name is None or name in found:
            continue
        try:
            found[str(name)] = GeoPoint(float(row[lat_index]), float(row[lon_index])).rounded()
        except (TypeError, ValueError):
            continue
    return found
