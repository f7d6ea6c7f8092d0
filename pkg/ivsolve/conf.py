"""
Settings access for library code.

Reads the Django setting when one is configured and falls back to the
documented default, so the numerical modules also work in a bare interpreter.
"""
from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

DEFAULTS = {
    'IVSOLVE_MAX_BOXES': 200_000_000,
    'IVSOLVE_LAPLACE_DET_MAX_N': 8,
    'IVSOLVE_LAPLACE_ADJ_MAX_N': 6,
    'IVSOLVE_KRAWCZYK_INV_MAX_ITER': 10,
    'IVSOLVE_KRAWCZYK_INV_STAGNATION': 1e-3,
    'IVSOLVE_REPORT_DIR': 'reports',
    'IVSOLVE_DEFAULT_SEED': 0,
    'IVSOLVE_POLL_INTERVAL': 5,
    'REDIS_URL': 'redis://localhost:6379/0',
    'REDIS_DB': 1,
}


def get_setting(name):
    default = DEFAULTS[name]
    try:
        return getattr(settings, name, default)
    except ImproperlyConfigured:
        return default
