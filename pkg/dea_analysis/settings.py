"""
Django settings for the dea_analysis project.

The project has no web surface and no database: it hosts the ``efficiency``
app, whose management commands (``evaluate``, ``verify``, ``bench``,
``create_sample_data``) are the command-line front end.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Nothing is signed or stored; the key only satisfies Django's startup checks.
SECRET_KEY = os.environ.get('SECRET_KEY', 'dea-analysis-local-key')

DEBUG = os.environ.get('DEBUG', 'False') == 'True'

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'efficiency',
]

# Datasets are read from CSV files and reports go to stdout or a file
DATABASES = {}

# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True

# Django REST Framework Configuration (serializers and the JSON renderer only)
REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'COERCE_DECIMAL_TO_STRING': False,
    'UNICODE_JSON': True,
    'STRICT_JSON': True,
}

# Solver and pipeline configuration
EFFICIENCY = {
    'PIVOT_EPS': 1e-10,
    'REFACTOR_INTERVAL': 20,
    'NODE_LIMIT': int(os.environ.get('EFFICIENCY_NODE_LIMIT', 10 ** 6)),
    'ORACLE_MAX_EFFICIENT': 16,
    'SLACK_ROW_TOLERANCE_FACTOR': 10,
    'DEFAULT_METHOD': 'relaxed-lp',
    'SIGNIFICANT_DIGITS': 12,
    'JOBS': int(os.environ.get('EFFICIENCY_JOBS', 1)),
}

# Logging goes to stderr; stdout carries the JSON/CSV reports
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'efficiency': {
            'handlers': ['console'],
            'level': os.environ.get('EFFICIENCY_LOG_LEVEL', 'WARNING'),
            'propagate': False,
        },
    },
}
