from django.apps import AppConfig


class SimharnessConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'simharness'
    verbose_name = 'Monte-Carlo Benchmarks'
