from pathlib import Path
from environ import Env
import os

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Initialize environment variables
env = Env()

# Explicitly load .env **only in development**
if os.environ.get("DJANGO_DEBUG", "False") == "True":
    env.read_env(os.path.join(BASE_DIR, '.env'))

# No web surface is served; the key only satisfies Django's startup checks.
SECRET_KEY = env('SECRET_KEY', default='lightcone-local-only-key')

DEBUG = env.bool('DEBUG', default=False)

ALLOWED_HOSTS = env.list('ALLOWED_HOSTS', default=[])

# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'nets',
]

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

USE_TZ = True

TIME_ZONE = 'UTC'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Numerical tolerances, read as strings since Env.float strips exponents
# Residuals computed from exact tangents (orthogonality, Guichard); NETS_TOL is the short form
NETS_RESIDUAL_TOL = float(env.str('NETS_RESIDUAL_TOL', default=env.str('NETS_TOL', default='1e-6')))
# Residuals built from nested central differences (Dupin, Lame, reduced Lame)
NETS_STENCIL_TOL = float(env.str('NETS_STENCIL_TOL', default='5e-2'))

NETS_LOG_LEVEL = env('NETS_LOG_LEVEL', default='WARNING')


# Add logging configuration
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
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
        'nets': {
            'handlers': ['console'],
            'level': NETS_LOG_LEVEL,
            'propagate': False,
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
}


# Celery settings
CELERY_RESULT_BACKEND = env('CELERY_RESULT_BACKEND', default='redis://localhost:6379/0')
CELERY_BROKER_URL = env('CELERY_BROKER_URL', default='redis://localhost:6379/0')
CELERY_ACCEPT_CONTENT = env.list('CELERY_ACCEPT_CONTENT', default=['json'])
CELERY_TASK_SERIALIZER = env('CELERY_TASK_SERIALIZER', default='json')
CELERY_RESULT_SERIALIZER = env('CELERY_RESULT_SERIALIZER', default='json')
CELERY_TIMEZONE = env('CELERY_TIMEZONE', default='UTC')
CELERY_TASK_TRACK_STARTED = env.bool('CELERY_TASK_TRACK_STARTED', default=True)
CELERY_TASK_TIME_LIMIT = env.int('CELERY_TASK_TIME_LIMIT', default=30 * 60)
CELERY_TASK_ALWAYS_EAGER = env.bool('CELERY_TASK_ALWAYS_EAGER', default=False)
CELERY_BROKER_CONNECTION_RETRY_ON_STARTUP = env.bool('CELERY_BROKER_CONNECTION_RETRY_ON_STARTUP', default=True)
