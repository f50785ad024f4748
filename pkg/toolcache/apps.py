from django.apps import AppConfig


class ToolcacheConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "toolcache"
