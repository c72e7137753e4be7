from django.apps import AppConfig


class SourceSimConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'source_sim'
    verbose_name = 'Source simulation'
