from django.apps import AppConfig


class GeostoreConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "geostore"
