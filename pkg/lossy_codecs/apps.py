from django.apps import AppConfig


class LossyCodecsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'lossy_codecs'
    verbose_name = 'GVW, LLZ and HYB codecs'
