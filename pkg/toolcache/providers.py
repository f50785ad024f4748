"""
Провайдеры результатов геофункций
"""

from typing import Protocol

from django.conf import settings

from domain.geo import GeoPoint, haversine
from geostore.models import Poi
from .calls import BUCKET_HOURS, PEAK_BUCKET, RESULT_COLUMNS, ToolRequest


class Provider(Protocol):
    name: str

    def resolve(self, request: ToolRequest) -> dict:
        """Табличный результат {"columns": [...], "rows": [...]}"""


# Коэффициенты длины маршрута относительно расстояния по прямой
PATH_FACTORS = {"walking": 1.3, "cycling": 1.3, "driving": 1.4, "transit": 1.4}

# Скорости в км/ч: (вне часа пик, час пик)
SPEEDS = {
    "walking": (5.0, 5.0),
    "cycling": (15.0, 15.0),
    "driving": (40.0, 22.0),
    "transit": (28.0, 24.0),
}
TRANSIT_OVERHEAD = 300  # секунды на ожидание и пересадки


class SyntheticProvider:
    """
    Детерминированная замена картографического сервиса

    Маршрут равен расстоянию по прямой, умноженному на коэффициент вида
    транспорта; время считается по фиксированной скорости окна. Длительности
    округляются до секунд, расстояния до метров
    """

    name = "synthetic-v1"

    def recorded_at(self, request: ToolRequest) -> str:
        hour = BUCKET_HOURS[request.time_bucket]
        return f"{settings.TOOL_COLLECTION_DATE}T{hour:02d}:00:00+08:00"

    def resolve(self, request: ToolRequest) -> dict:
        handler = getattr(self, f"_{request.function}")
        return {"columns": list(RESULT_COLUMNS[request.function]), "rows": handler(request)}

    def travel_seconds(self, straight: float, mode: str, bucket: str) -> int:
        path = straight * PATH_FACTORS[mode]
        if path == 0:
            return 0
        offpeak, peak = SPEEDS[mode]
        speed = (peak if bucket == PEAK_BUCKET else offpeak) * 1000 / 3600
        seconds = path / speed
        if mode == "transit":
            seconds += TRANSIT_OVERHEAD
        return round(seconds)

    def _time_query(self, request: ToolRequest) -> list:
        straight = haversine(request.point("origin"), request.point("destination"))
        return [[self.travel_seconds(straight, request.params["mode"], request.time_bucket)]]

    def _rush_hour_query(self, request: ToolRequest) -> list:
        straight = haversine(request.point("origin"), request.point("destination"))
        return [[self.travel_seconds(straight, request.params["mode"], PEAK_BUCKET)]]

    def _distance_query(self, request: ToolRequest) -> list:
        straight = haversine(request.point("origin"), request.point("destination"))
        kind = request.params["kind"]
        factor = 1.0 if kind == "straight" else PATH_FACTORS[kind]
        return [[round(straight * factor)]]

    def _surrounding_pois_query(self, request: ToolRequest) -> list:
        center = request.point("center")
        radius = request.params["radius"]
        found = []
        for poi in Poi.objects.filter(label=request.params["label"]).order_by("poi_id"):
            distance = round(haversine(center, GeoPoint(poi.latitude, poi.longitude)))
            if distance <= radius:
                found.append([poi.name, poi.label, poi.latitude, poi.longitude, distance])
        found.sort(key=lambda row: (row[4], row[0]))
        return found
