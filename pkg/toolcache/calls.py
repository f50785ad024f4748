"""
Нормализованный запрос к геофункции и его ключ в кеше
"""

import json
from dataclasses import dataclass
from typing import Any

from domain.geo import GeoPoint
from domain.instances import ToolStep
from domain.synthesis import Item
from .exceptions import InvalidParamsError
from .serializers import PARAM_SERIALIZERS


DEFAULT_BUCKET = "midnight_00"
PEAK_BUCKET = "peak_08"
OFFPEAK_BUCKET = "offpeak_15"
BUCKET_HOURS = {"midnight_00": 0, "offpeak_15": 15, "peak_08": 8}

RESULT_COLUMNS = {
    "time_query": ["duration_s"],
    "distance_query": ["distance_m"],
    "surrounding_pois_query": ["name", "label", "latitude", "longitude", "straight_distance"],
    "rush_hour_query": ["duration_s"],
}
SCALAR_KINDS = {"time_query": "duration", "rush_hour_query": "duration", "distance_query": "distance"}


def _normalize_radius(value: float):
    value = round(float(value), 3)
    return int(value) if value.is_integer() else value


def resolve_bucket(function: str, params: dict) -> str:
    """
    Окно запроса: час пик для rush_hour_query, дневное окно вместо
    полуночи для транспорта, иначе указанное или полночь
    """

    if function == "rush_hour_query":
        return PEAK_BUCKET
    bucket = params.get("time_bucket") or DEFAULT_BUCKET
    if function == "time_query" and params.get("mode") == "transit" and bucket == DEFAULT_BUCKET:
        return OFFPEAK_BUCKET
    return bucket


@dataclass(frozen=True, eq=False)
class ToolRequest:
    """
    Attributes:
        function(str): Имя функции
        params(dict): Нормализованные параметры вместе с time_bucket
    """

    function: str
    params: dict[str, Any]

    @property
    def time_bucket(self) -> str:
        return self.params["time_bucket"]

    @property
    def key(self) -> str:
        return json.dumps(
            {"function": self.function, "params": self.params},
            sort_keys=True,
            separators=(",", ":"),
            ensure_ascii=False,
        )

    def point(self, name: str) -> GeoPoint:
        return GeoPoint.from_value(self.params[name])

    def to_step(self, payload: dict) -> ToolStep:
        return ToolStep(self.function, dict(self.params), payload)

    def __hash__(self) -> int:
        return hash(self.key)

    def __eq__(self, other) -> bool:
        return isinstance(other, ToolRequest) and self.key == other.key


def make_request(function: str, params: dict) -> ToolRequest:
    """
    Проверяет параметры по схеме функции и нормализует их

    Raises:
        InvalidParamsError: неизвестная функция или параметры не проходят схему
    """

    try:
        serializer_class = PARAM_SERIALIZERS[function]
    except KeyError:
        raise InvalidParamsError(function, "unknown function") from None
    if not isinstance(params, dict):
        raise InvalidParamsError(function, "params must be an object")
    serializer = serializer_class(data=params)
    if not serializer.is_valid():
        raise InvalidParamsError(function, dict(serializer.errors))
    normalized = dict(serializer.validated_data)
    if "radius" in normalized:
        normalized["radius"] = _normalize_radius(normalized["radius"])
    normalized["time_bucket"] = resolve_bucket(function, normalized)
    return ToolRequest(function, normalized)


def request_from_step(step: ToolStep) -> ToolRequest:
    return make_request(step.function, step.params)


def payload_items(function: str, payload: dict, label: str = "") -> list[Item]:
    """
    Значения ответа для правил вывода: один скаляр с меткой вызова или
    по элементу на каждый найденный POI
    """

    rows = payload.get("rows") or []
    if function == "surrounding_pois_query":
        return [Item(row[0], row[4], "distance") for row in rows]
    return [Item(label or function, row[0], SCALAR_KINDS[function]) for row in rows[:1]]
