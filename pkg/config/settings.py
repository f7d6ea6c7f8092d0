"""
Django settings for the ivsolve project
"""

import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

# Build paths
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv('DJANGO_SECRET_KEY', 'django-insecure-ivsolve-dev-key-change-in-production')

DEBUG = os.getenv('DEBUG', 'True') == 'True'

# Application definition
INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',

    # Third party
    'rest_framework',

    # Local
    'ivsolve',
]

# Database
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.getenv('DATABASE_PATH', BASE_DIR / 'db.sqlite3'),
    }
}

# ==================== Redis (bench queue) ====================
REDIS_URL = os.getenv('REDIS_URL', 'redis://localhost:6379/0')
REDIS_DB = int(os.getenv('REDIS_DB', 1))

# ==================== Solver ====================
IVSOLVE_MAX_BOXES = int(os.getenv('IVSOLVE_MAX_BOXES', 200_000_000))
IVSOLVE_LAPLACE_DET_MAX_N = int(os.getenv('IVSOLVE_LAPLACE_DET_MAX_N', 8))
IVSOLVE_LAPLACE_ADJ_MAX_N = int(os.getenv('IVSOLVE_LAPLACE_ADJ_MAX_N', 6))
IVSOLVE_KRAWCZYK_INV_MAX_ITER = int(os.getenv('IVSOLVE_KRAWCZYK_INV_MAX_ITER', 10))
IVSOLVE_KRAWCZYK_INV_STAGNATION = float(os.getenv('IVSOLVE_KRAWCZYK_INV_STAGNATION', 1e-3))
IVSOLVE_REPORT_DIR = os.getenv('IVSOLVE_REPORT_DIR', str(BASE_DIR / 'reports'))
IVSOLVE_DEFAULT_SEED = int(os.getenv('IVSOLVE_DEFAULT_SEED', 0))
IVSOLVE_POLL_INTERVAL = int(os.getenv('POLL_INTERVAL', 5))

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = True
USE_TZ = True

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# REST Framework settings (serializers and renderers only, there is no HTTP surface)
REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
}

# Logging
LOG_FORMAT = os.getenv('LOG_FORMAT', 'verbose')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'json': {
            '()': 'pythonjsonlogger.jsonlogger.JsonFormatter',
            'format': '%(asctime)s %(levelname)s %(name)s %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'json' if LOG_FORMAT == 'json' else 'verbose',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': os.getenv('LOG_LEVEL', 'INFO'),
    },
}
