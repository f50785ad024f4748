from django.apps import AppConfig


class MapagentConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "mapagent"
