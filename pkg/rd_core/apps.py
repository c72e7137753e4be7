from django.apps import AppConfig


class RdCoreConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'rd_core'
    verbose_name = 'Rate-distortion core'
