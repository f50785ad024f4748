"""
Модели жилых комплексов, POI и пар близости
"""

from django.db import models


class Community(models.Model):
    """
    Attributes:
        community_id(CharField): Непрозрачный идентификатор из фикстуры
        city(CharField): Город
        name(CharField): Название жилого комплекса
        district(CharField): Район
        address(CharField): Адрес
        latitude(FloatField): Широта
        longitude(FloatField): Долгота
        greening_rate(FloatField): Процент озеленения
        avg_price(IntegerField): Средняя цена за квадратный метр
        property_type(CharField): Тип недвижимости
        sales_status(CharField): Статус продаж

    Meta:
        verbose_name (str): Название модели в единственном числе
        verbose_name_plural (str): Название модели во множественном числе
    """

    community_id = models.CharField(max_length=32, unique=True, verbose_name="идентификатор")
    city = models.CharField(max_length=64, db_index=True, verbose_name="город")
    name = models.CharField(max_length=128, verbose_name="название")
    district = models.CharField(max_length=64, verbose_name="район")
    address = models.CharField(max_length=256, blank=True, verbose_name="адрес")
    latitude = models.FloatField(verbose_name="широта")
    longitude = models.FloatField(verbose_name="долгота")
    greening_rate = models.FloatField(verbose_name="озеленение, %")
    avg_price = models.IntegerField(verbose_name="средняя цена")
    property_type = models.CharField(max_length=32, verbose_name="тип недвижимости")
    sales_status = models.CharField(max_length=32, verbose_name="статус продаж")

    class Meta:
        verbose_name = "жилой комплекс"
        verbose_name_plural = "жилые комплексы"

    def __str__(self) -> str:
        return self.name


class Poi(models.Model):
    """
    Attributes:
        poi_id(CharField): Непрозрачный идентификатор из фикстуры
        city(CharField): Город
        name(CharField): Название
        category(CharField): Одна из шести категорий
        label(CharField): Уточнённая метка, например primary school
        latitude(FloatField): Широта
        longitude(FloatField): Долгота
    """

    poi_id = models.CharField(max_length=32, unique=True, verbose_name="идентификатор")
    city = models.CharField(max_length=64, db_index=True, verbose_name="город")
    name = models.CharField(max_length=128, verbose_name="название")
    category = models.CharField(max_length=32, verbose_name="категория")
    label = models.CharField(max_length=64, verbose_name="метка")
    latitude = models.FloatField(verbose_name="широта")
    longitude = models.FloatField(verbose_name="долгота")

    class Meta:
        verbose_name = "POI"
        verbose_name_plural = "POI"

    def __str__(self) -> str:
        return self.name


class PoiCommunityPair(models.Model):
    """Жилой комплекс в радиусе пары от POI"""

    city = models.CharField(max_length=64, db_index=True, verbose_name="город")
    poi = models.ForeignKey(Poi, on_delete=models.CASCADE, verbose_name="POI")
    community = models.ForeignKey(
        Community, on_delete=models.CASCADE, verbose_name="жилой комплекс"
    )
    straight_distance = models.IntegerField(verbose_name="расстояние, м")

    class Meta:
        verbose_name = "пара POI - комплекс"
        verbose_name_plural = "пары POI - комплекс"


class CommunityPair(models.Model):
    """Соседний жилой комплекс; каждая пара хранится в обе стороны"""

    city = models.CharField(max_length=64, db_index=True, verbose_name="город")
    community = models.ForeignKey(
        Community,
        on_delete=models.CASCADE,
        related_name="neighbor_pairs",
        verbose_name="жилой комплекс",
    )
    neighbor = models.ForeignKey(
        Community,
        on_delete=models.CASCADE,
        related_name="+",
        verbose_name="сосед",
    )
    straight_distance = models.IntegerField(verbose_name="расстояние, м")

    class Meta:
        verbose_name = "пара соседних комплексов"
        verbose_name_plural = "пары соседних комплексов"


class TableCaption(models.Model):
    """
    Attributes:
        table_id(CharField): Имя SQL-представления
        caption(CharField): Подпись таблицы
        city(CharField): Город
        family(CharField): Семейство таблиц
        columns(JSONField): Схема колонок
        position(IntegerField): Порядок в каталоге (город, семейство)
    """

    table_id = models.CharField(max_length=128, unique=True, verbose_name="таблица")
    caption = models.CharField(max_length=256, unique=True, verbose_name="подпись")
    city = models.CharField(max_length=64, verbose_name="город")
    family = models.CharField(max_length=32, verbose_name="семейство")
    columns = models.JSONField(default=list, verbose_name="колонки")
    position = models.IntegerField(default=0, verbose_name="порядок")

    class Meta:
        ordering = ("position",)
        verbose_name = "подпись таблицы"
        verbose_name_plural = "подписи таблиц"

    def __str__(self) -> str:
        return self.caption
