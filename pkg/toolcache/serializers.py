"""
Схемы параметров четырёх геофункций
"""

from django.conf import settings
from rest_framework import serializers

from domain.geo import GeoPoint


TIME_BUCKETS = ("midnight_00", "offpeak_15", "peak_08")
TIME_MODES = ("walking", "driving", "cycling", "transit")
DISTANCE_KINDS = ("straight", "walking", "driving")
RUSH_HOUR_MODES = ("driving", "transit")


class CoordinateField(serializers.Field):
    """
    Координаты как [широта, долгота] или строка "широта,долгота";
    значение округляется до 6 знаков
    """

    default_error_messages = {"invalid": "Expected [latitude, longitude] within valid ranges."}

    def to_internal_value(self, data) -> list[float]:
        try:
            return GeoPoint.from_value(data).rounded().as_list()
        except (TypeError, ValueError, KeyError):
            self.fail("invalid")

    def to_representation(self, value):
        return value


class LowercaseChoiceField(serializers.ChoiceField):
    def to_internal_value(self, data):
        if isinstance(data, str):
            data = data.strip().lower()
        return super().to_internal_value(data)


class TimeQuerySerializer(serializers.Serializer):
    """
    Fields:
        origin: Точка отправления
        destination: Точка назначения
        mode: walking, driving, cycling или transit
        time_bucket: Временное окно, по умолчанию midnight_00
    """

    origin = CoordinateField()
    destination = CoordinateField()
    mode = LowercaseChoiceField(choices=TIME_MODES)
    time_bucket = LowercaseChoiceField(choices=TIME_BUCKETS, required=False)


class DistanceQuerySerializer(serializers.Serializer):
    origin = CoordinateField()
    destination = CoordinateField()
    kind = LowercaseChoiceField(choices=DISTANCE_KINDS)
    time_bucket = LowercaseChoiceField(choices=TIME_BUCKETS, required=False)


class SurroundingPoisSerializer(serializers.Serializer):
    """
    Fields:
        center: Центр поиска
        radius: Радиус в метрах, больше нуля
        label: Метка POI из таксономии
    """

    center = CoordinateField()
    radius = serializers.FloatField()
    label = LowercaseChoiceField(choices=[])
    time_bucket = LowercaseChoiceField(choices=TIME_BUCKETS, required=False)

    def __init__(self, *args, **kwargs) -> None:
        super().__init__(*args, **kwargs)
        self.fields["label"].choices = [
            label for labels in settings.POI_TAXONOMY.values() for label in labels
        ]

    def validate_radius(self, value: float) -> float:
        if value <= 0:
            raise serializers.ValidationError("radius must be positive")
        return value


class RushHourSerializer(serializers.Serializer):
    origin = CoordinateField()
    destination = CoordinateField()
    mode = LowercaseChoiceField(choices=RUSH_HOUR_MODES)
    time_bucket = LowercaseChoiceField(choices=TIME_BUCKETS, required=False)


PARAM_SERIALIZERS = {
    "time_query": TimeQuerySerializer,
    "distance_query": DistanceQuerySerializer,
    "surrounding_pois_query": SurroundingPoisSerializer,
    "rush_hour_query": RushHourSerializer,
}
