"""
Географические значения и расстояние по формуле гаверсинусов
"""

from dataclasses import dataclass
from math import asin, cos, radians, sin, sqrt


AVERAGE_EARTH_RADIUS: int = 6_371_000  # средний радиус Земли в метрах
COORDINATE_PRECISION: int = 6


@dataclass(frozen=True)
class GeoPoint:
    """
    Attributes:
        latitude(float): Широта, градусы WGS-84
        longitude(float): Долгота, градусы
    """

    latitude: float
    longitude: float

    def __post_init__(self) -> None:
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} is out of [-90, 90]")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude {self.longitude} is out of [-180, 180]")

    def rounded(self, precision: int = COORDINATE_PRECISION) -> "GeoPoint":
        """Точка с координатами, округлёнными до заданного числа знаков"""
        return GeoPoint(round(self.latitude, precision), round(self.longitude, precision))

    def as_list(self) -> list[float]:
        return [self.latitude, self.longitude]

    @classmethod
    def from_value(cls, value) -> "GeoPoint":
        """
        Создаёт точку из пары [широта, долгота], словаря или строки "lat,lon"

        Raises:
            ValueError: если значение нельзя разобрать как координаты
        """

        if isinstance(value, GeoPoint):
            return value
        if isinstance(value, dict):
            return cls(float(value["latitude"]), float(value["longitude"]))
        if isinstance(value, str):
            parts = value.split(",")
            if len(parts) != 2:
                raise ValueError(f"cannot parse coordinates from {value!r}")
            return cls(float(parts[0]), float(parts[1]))
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return cls(float(value[0]), float(value[1]))
        raise ValueError(f"cannot parse coordinates from {value!r}")


def haversine(a: GeoPoint, b: GeoPoint) -> float:
    """
    Вычисляет расстояние между двумя гео-точками по формуле гаверсинусов

    Args:
        a: Первая точка
        b: Вторая точка

    Returns:
        Расстояние между точками в метрах
    """

    lat1, lon1, lat2, lon2 = map(radians, [a.latitude, a.longitude, b.latitude, b.longitude])
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = sin(dlat / 2) ** 2 + cos(lat1) * cos(lat2) * sin(dlon / 2) ** 2
    return AVERAGE_EARTH_RADIUS * (2 * asin(sqrt(min(1.0, h))))
