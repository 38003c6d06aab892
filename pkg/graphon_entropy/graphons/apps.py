from django.apps import AppConfig


class GraphonsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'graphons'
    verbose_name = 'Graphon Representations'
