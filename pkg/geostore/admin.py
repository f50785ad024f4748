"""
Добавление в admin
"""

from django.contrib import admin
from .models import Community, Poi, TableCaption


@admin.register(Community)
class CommunityAdmin(admin.ModelAdmin):
    """
    Admin-представление для модели жилого комплекса
    """

    list_display = (
        "community_id",
        "name",
        "city",
        "district",
        "avg_price",
        "greening_rate",
        "property_type",
        "sales_status",
    )
    list_filter = (
        "city",
        "district",
        "property_type",
        "sales_status",
    )
    search_fields = ("name", "address")


@admin.register(Poi)
class PoiAdmin(admin.ModelAdmin):
    list_display = ("poi_id", "name", "city", "category", "label")
    list_filter = ("city", "category", "label")
    search_fields = ("name",)


@admin.register(TableCaption)
class TableCaptionAdmin(admin.ModelAdmin):
    list_display = ("table_id", "caption", "city", "family")
    list_filter = ("city", "family")
