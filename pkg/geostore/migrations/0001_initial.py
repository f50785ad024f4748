# Generated by Django 5.2.4 on 2026-09-02 10:41

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):
    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="Community",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                (
                    "community_id",
                    models.CharField(
                        max_length=32, unique=True, verbose_name="идентификатор"
                    ),
                ),
                (
                    "city",
                    models.CharField(db_index=True, max_length=64, verbose_name="город"),
                ),
                ("name", models.CharField(max_length=128, verbose_name="название")),
                ("district", models.CharField(max_length=64, verbose_name="район")),
                (
                    "address",
                    models.CharField(blank=True, max_length=256, verbose_name="адрес"),
                ),
                ("latitude", models.FloatField(verbose_name="широта")),
                ("longitude", models.FloatField(verbose_name="долгота")),
                ("greening_rate", models.FloatField(verbose_name="озеленение, %")),
                ("avg_price", models.IntegerField(verbose_name="средняя цена")),
                (
                    "property_type",
                    models.CharField(max_length=32, verbose_name="тип недвижимости"),
                ),
                (
                    "sales_status",
                    models.CharField(max_length=32, verbose_name="статус продаж"),
                ),
            ],
            options={
                "verbose_name": "жилой комплекс",
                "verbose_name_plural": "жилые комплексы",
            },
        ),
        migrations.CreateModel(
            name="Poi",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                (
                    "poi_id",
                    models.CharField(
                        max_length=32, unique=True, verbose_name="идентификатор"
                    ),
                ),
                (
                    "city",
                    models.CharField(db_index=True, max_length=64, verbose_name="город"),
                ),
                ("name", models.CharField(max_length=128, verbose_name="название")),
                ("category", models.CharField(max_length=32, verbose_name="категория")),
                ("label", models.CharField(max_length=64, verbose_name="метка")),
                ("latitude", models.FloatField(verbose_name="широта")),
                ("longitude", models.FloatField(verbose_name="долгота")),
            ],
            options={
                "verbose_name": "POI",
                "verbose_name_plural": "POI",
            },
        ),
        migrations.CreateModel(
            name="TableCaption",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                (
                    "table_id",
                    models.CharField(max_length=128, unique=True, verbose_name="таблица"),
                ),
                (
                    "caption",
                    models.CharField(max_length=256, unique=True, verbose_name="подпись"),
                ),
                ("city", models.CharField(max_length=64, verbose_name="город")),
                ("family", models.CharField(max_length=32, verbose_name="семейство")),
                ("columns", models.JSONField(default=list, verbose_name="колонки")),
                ("position", models.IntegerField(default=0, verbose_name="порядок")),
            ],
            options={
                "verbose_name": "подпись таблицы",
                "verbose_name_plural": "подписи таблиц",
                "ordering": ("position",),
            },
        ),
        migrations.CreateModel(
            name="CommunityPair",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                (
                    "city",
                    models.CharField(db_index=True, max_length=64, verbose_name="город"),
                ),
                ("straight_distance", models.IntegerField(verbose_name="расстояние, м")),
                (
                    "community",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="neighbor_pairs",
                        to="geostore.community",
                        verbose_name="жилой комплекс",
                    ),
                ),
                (
                    "neighbor",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="+",
                        to="geostore.community",
                        verbose_name="сосед",
                    ),
                ),
            ],
            options={
                "verbose_name": "пара соседних комплексов",
                "verbose_name_plural": "пары соседних комплексов",
            },
        ),
        migrations.CreateModel(
            name="PoiCommunityPair",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                (
                    "city",
                    models.CharField(db_index=True, max_length=64, verbose_name="город"),
                ),
                ("straight_distance", models.IntegerField(verbose_name="расстояние, м")),
                (
                    "community",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        to="geostore.community",
                        verbose_name="жилой комплекс",
                    ),
                ),
                (
                    "poi",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        to="geostore.poi",
                        verbose_name="POI",
                    ),
                ),
            ],
            options={
                "verbose_name": "пара POI - комплекс",
                "verbose_name_plural": "пары POI - комплекс",
            },
        ),
    ]
