"""
Django settings for the entropy_main project.

The project has no web surface: it hosts the graphon entropy apps, their
management commands (simulate, estimate, benchmark, timeseries) and the
results registry database.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

from pathlib import Path
import os
try:
    import dj_database_url  # optional, used only when DATABASE_URL is set
except Exception:
    dj_database_url = None

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Load environment variables from .env file
try:
    from dotenv import load_dotenv
    env_path = BASE_DIR / '.env'
    load_dotenv(dotenv_path=env_path)
except ImportError:
    pass  # dotenv not installed


# Only used for Django internals; nothing here is served.
SECRET_KEY = os.getenv("SECRET_KEY", "graphon-entropy-local-key-not-for-deployment")

DEBUG = os.getenv("DEBUG", "False").lower() in ['true', '1', 'yes']

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'graphons.apps.GraphonsConfig',
    'sampler.apps.SamplerConfig',
    'estimators.apps.EstimatorsConfig',
    'blockfit.apps.BlockfitConfig',
    'simharness.apps.SimharnessConfig',
    'ingest.apps.IngestConfig',
]

MIDDLEWARE = []


# Database (results registry)
DATABASE_URL = os.getenv("DATABASE_URL", "")
if DATABASE_URL and dj_database_url is not None:
    DATABASES = {
        "default": dj_database_url.parse(DATABASE_URL, conn_max_age=600)
    }
else:
    DATABASES = {
        "default": {
            "ENGINE": "django.db.backends.sqlite3",
            "NAME": BASE_DIR / "db.sqlite3",
        }
    }


# Internationalization
LANGUAGE_CODE = "en"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


def _env_float(name, default):
    return float(os.getenv(f"GRAPHON_{name}", default))


def _env_int(name, default):
    return int(os.getenv(f"GRAPHON_{name}", default))


# Numerical defaults for the estimation engine.
# Every key can be overridden with an environment variable GRAPHON_<KEY>.
GRAPHON_ENTROPY = {
    'QUAD_POINTS': _env_int('QUAD_POINTS', 2048),
    'CLIP_EPSILON': _env_float('CLIP_EPSILON', 1e-12),
    'USVT_ETA': _env_float('USVT_ETA', 0.01),
    'USVT_TOLERANCE': _env_float('USVT_TOLERANCE', 1e-8),
    'GHAT_NORMALIZATION': os.getenv('GRAPHON_GHAT_NORMALIZATION', 'configuration'),
    'FIT_RESTARTS': _env_int('FIT_RESTARTS', 1),
    'FIT_MAX_SWEEPS': _env_int('FIT_MAX_SWEEPS', 100),
    'SPARSE_LOG_EXPONENT': _env_float('SPARSE_LOG_EXPONENT', 3.5),
    # f2 test graphon; the published tables leave these unstated
    'F2_A0': _env_float('F2_A0', 0.25),
    'F2_A1': _env_float('F2_A1', 0.15),
    'F2_ALPHA1': _env_float('F2_ALPHA1', 3.0),
    'GRID_POINTS': _env_int('GRID_POINTS', 513),
    'BETA_TOLERANCE': _env_float('BETA_TOLERANCE', 1e-12),
    'OUTPUT_DIR': os.getenv('GRAPHON_OUTPUT_DIR', 'output'),
}

LOG_LEVEL = os.getenv('GRAPHON_LOG_LEVEL', 'INFO').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': 'INFO',
        },
        **{
            app: {
                'handlers': ['console'],
                'level': LOG_LEVEL,
                'propagate': False,
            }
            for app in ('graphons', 'sampler', 'estimators', 'blockfit', 'simharness', 'ingest')
        },
    },
}
