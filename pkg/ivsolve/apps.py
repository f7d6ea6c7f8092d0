from django.apps import AppConfig


class IvsolveConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'ivsolve'
    verbose_name = 'Interval steady-state enclosure'
