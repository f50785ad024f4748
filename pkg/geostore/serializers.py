"""
Сериализаторы строк фикстур и запросов к хранилищу
"""

from django.conf import settings
from rest_framework import serializers

from .models import TableCaption


class CommunityRowSerializer(serializers.Serializer):
    """
    Строка фикстуры жилого комплекса

    Fields:
        id: Идентификатор
        latitude: Широта в [-90, 90]
        longitude: Долгота в [-180, 180]
        greening_rate: Процент в [0, 100]
        avg_price: Цена за квадратный метр > 0
    """

    id = serializers.CharField(max_length=32)
    name = serializers.CharField(max_length=128)
    district = serializers.CharField(max_length=64)
    address = serializers.CharField(max_length=256, allow_blank=True)
    latitude = serializers.FloatField(min_value=-90, max_value=90)
    longitude = serializers.FloatField(min_value=-180, max_value=180)
    greening_rate = serializers.FloatField(min_value=0, max_value=100)
    avg_price = serializers.IntegerField(min_value=1)
    property_type = serializers.ChoiceField(choices=[])
    sales_status = serializers.ChoiceField(choices=[])

    def __init__(self, *args, **kwargs) -> None:
        super().__init__(*args, **kwargs)
        self.fields["property_type"].choices = settings.PROPERTY_TYPES
        self.fields["sales_status"].choices = settings.SALES_STATUSES


class PoiRowSerializer(serializers.Serializer):
    """Строка фикстуры POI; метка должна принадлежать своей категории"""

    id = serializers.CharField(max_length=32)
    name = serializers.CharField(max_length=128)
    category = serializers.ChoiceField(choices=[])
    label = serializers.CharField(max_length=64)
    latitude = serializers.FloatField(min_value=-90, max_value=90)
    longitude = serializers.FloatField(min_value=-180, max_value=180)

    def __init__(self, *args, **kwargs) -> None:
        super().__init__(*args, **kwargs)
        self.fields["category"].choices = list(settings.POI_TAXONOMY)

    def validate(self, attrs: dict) -> dict:
        if attrs["label"] not in settings.POI_TAXONOMY[attrs["category"]]:
            raise serializers.ValidationError(
                {"label": f"{attrs['label']!r} is not a {attrs['category']} label"}
            )
        return attrs


class TableCaptionSerializer(serializers.ModelSerializer):
    class Meta:
        model = TableCaption
        fields = ("table_id", "caption", "city", "family", "columns")


class SqlQuerySerializer(serializers.Serializer):
    statement = serializers.CharField()
