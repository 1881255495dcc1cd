from django.apps import AppConfig


class EfficiencyConfig(AppConfig):
    name = 'efficiency'
    verbose_name = 'RAM efficiency and global reference sets'
