from django.apps import AppConfig


class NetsConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "nets"
    verbose_name = "Light-cone nets"
