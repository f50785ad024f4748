from django.apps import AppConfig


class QagenConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "qagen"
