# Generated by Django 5.2.4 on 2026-09-02 10:41

from django.db import migrations, models


class Migration(migrations.Migration):
    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="CacheEntry",
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
                ("key", models.TextField(unique=True, verbose_name="ключ")),
                ("function", models.CharField(max_length=32, verbose_name="функция")),
                ("time_bucket", models.CharField(max_length=16, verbose_name="окно")),
                ("params", models.JSONField(verbose_name="параметры")),
                ("payload", models.JSONField(verbose_name="результат")),
                (
                    "provider_name",
                    models.CharField(max_length=64, verbose_name="провайдер"),
                ),
                ("recorded_at", models.CharField(max_length=32, verbose_name="записано")),
            ],
            options={
                "verbose_name": "запись кеша",
                "verbose_name_plural": "записи кеша",
            },
        ),
    ]
