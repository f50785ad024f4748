"""
Добавление в admin
"""

from django.contrib import admin
from .models import CacheEntry


@admin.register(CacheEntry)
class CacheEntryAdmin(admin.ModelAdmin):
    """
    Admin-представление для записей кеша инструментов
    """

    list_display = ("function", "time_bucket", "provider_name", "recorded_at")
    list_filter = ("function", "time_bucket", "provider_name")
    search_fields = ("key",)
