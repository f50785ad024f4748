"""
Словарь сущностей для лексического SLU: имена из хранилища и словари настроек

Формат файла: {"version": 1, "entries": {"<тип слота>": ["<значение>", ...]}},
значения в каждом типе отсортированы
"""

import json
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from django.conf import settings

from geostore.models import Community, Poi
from .exceptions import GazetteerError


logger = logging.getLogger(__name__)

GAZETTEER_VERSION = 1


@dataclass(frozen=True)
class Gazetteer:
    """
    Attributes:
        entries(dict): Тип слота -> отсортированный кортеж значений
    """

    entries: dict[str, tuple[str, ...]]

    @cached_property
    def surfaces(self) -> tuple[tuple[str, str], ...]:
        """Пары (значение, тип слота) от длинных к коротким"""
        pairs = {(value, slot_type) for slot_type, values in self.entries.items() for value in values}
        return tuple(sorted(pairs, key=lambda pair: (-len(pair[0]), pair[0], pair[1])))

    def __len__(self) -> int:
        return sum(len(values) for values in self.entries.values())

    def to_dict(self) -> dict:
        return {"version": GAZETTEER_VERSION, "entries": {key: list(values) for key, values in sorted(self.entries.items())}}

    def dump(self, path: Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), ensure_ascii=False, indent=1, sort_keys=True), encoding="utf-8")

    @classmethod
    def from_dict(cls, data: dict) -> "Gazetteer":
        if data.get("version") != GAZETTEER_VERSION or not isinstance(data.get("entries"), dict):
            raise GazetteerError(f"unsupported gazetteer document (version {data.get('version')!r})")
        unknown = set(data["entries"]) - set(settings.QA_SLOT_TYPES)
        if unknown:
            raise GazetteerError(f"unknown slot types {sorted(unknown)}")
        return cls({key: tuple(sorted(set(values))) for key, values in data["entries"].items()})

    @classmethod
    def load(cls, path: Path) -> "Gazetteer":
        """
        Raises:
            GazetteerError: файл не читается или формат неверен
        """

        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise GazetteerError(f"cannot read gazetteer {path}: {exc}") from exc
        return cls.from_dict(data)


def build_gazetteer(cities=None, using: str = "default") -> Gazetteer:
    """
    Собирает словарь из загруженного хранилища: города, районы, сообщества,
    POI, а также метки POI, типы недвижимости и виды транспорта из настроек
    """

    communities = Community.objects.using(using)
    pois = Poi.objects.using(using)
    if cities:
        communities = communities.filter(city__in=cities)
        pois = pois.filter(city__in=cities)
    city_names = set(communities.values_list("city", flat=True)) | set(pois.values_list("city", flat=True))
    districts = set(communities.values_list("district", flat=True))
    for city in city_names:
        districts.update(settings.CITY_PROFILES.get(city, {}).get("districts", ()))
    entries = {
        "city": city_names,
        "district": districts,
        "community_name": set(communities.values_list("name", flat=True)),
        "poi_name": set(pois.values_list("name", flat=True)),
        "poi_label": {label for labels in settings.POI_TAXONOMY.values() for label in labels},
        "property_type": set(settings.PROPERTY_TYPES),
        "transport_mode": set(settings.SLU_TRANSPORT_MODES),
    }
    gazetteer = Gazetteer({key: tuple(sorted(values)) for key, values in entries.items()})
    logger.info("gazetteer built with %d entries over %d cities", len(gazetteer), len(city_names))
    return gazetteer
