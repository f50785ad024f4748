from django.apps import AppConfig


class DbagentConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "dbagent"
