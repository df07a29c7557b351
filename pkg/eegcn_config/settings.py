"""
EVENT DETECTOR - Django Settings
================================
This file configures the Django project around the detector app.

KEY CONCEPTS:
- INSTALLED_APPS: contenttypes (needed by the ORM) and the detector
- DATABASES: the run ledger; SQLite unless DATABASE_URL says otherwise
- LOGGING: one console handler, the `detector` logger at LOG_LEVEL
- EEGCN_RUNS_DIR: where run directories are created

No web stack: the project is driven from `manage.py` commands.
"""

from pathlib import Path

import dj_database_url
from decouple import config

# Build paths inside the project
BASE_DIR = Path(__file__).resolve().parent.parent

# Only used by Django internals (no sessions or signing here), still read from .env
SECRET_KEY = config('SECRET_KEY', default='eegcn-local-development-key')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []

INSTALLED_APPS = [
    'django.contrib.contenttypes',  # Content type system (ORM bookkeeping)
    'detector',                     # Event detector: library + commands
]

# DATABASE: run ledger
# Local default is a SQLite file next to manage.py; DATABASE_URL switches it
DATABASES = {
    'default': dj_database_url.config(
        default=config('DATABASE_URL', default=f"sqlite:///{BASE_DIR / 'eegcn.sqlite3'}"),
        conn_max_age=600,
    )
}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Where every command creates its <timestamp>-seed<seed> run directory
EEGCN_RUNS_DIR = Path(config('EEGCN_RUNS_DIR', default=str(BASE_DIR / 'runs')))

# LOGGING
# Library modules log through logging.getLogger(__name__) under "detector"
LOG_LEVEL = config('LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'detector': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}
