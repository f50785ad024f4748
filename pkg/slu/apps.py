from django.apps import AppConfig


class SluConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "slu"
