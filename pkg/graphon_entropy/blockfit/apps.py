from django.apps import AppConfig


class BlockfitConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'blockfit'
    verbose_name = 'Stochastic Block Model Fitting'
