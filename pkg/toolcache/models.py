"""
Модель записи кеша инструментов
"""

from django.db import models


class CacheEntry(models.Model):
    """
    Attributes:
        key(TextField): Каноническая сериализация запроса
        function(CharField): Имя функции
        time_bucket(CharField): Временное окно запроса
        params(JSONField): Нормализованные параметры
        payload(JSONField): Табличный результат {"columns", "rows"}
        provider_name(CharField): Провайдер, записавший результат
        recorded_at(CharField): Момент записи
    """

    key = models.TextField(unique=True, verbose_name="ключ")
    function = models.CharField(max_length=32, verbose_name="функция")
    time_bucket = models.CharField(max_length=16, verbose_name="окно")
    params = models.JSONField(verbose_name="параметры")
    payload = models.JSONField(verbose_name="результат")
    provider_name = models.CharField(max_length=64, verbose_name="провайдер")
    recorded_at = models.CharField(max_length=32, verbose_name="записано")

    class Meta:
        verbose_name = "запись кеша"
        verbose_name_plural = "записи кеша"

    def __str__(self) -> str:
        return self.key
