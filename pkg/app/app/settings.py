"""
Django settings for the particle integration project.

Every experiment default can be overridden through the environment;
command-line flags and --config files override these in turn.

For more information on this file, see
https://docs.djangoproject.com/en/3.2/topics/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('SECRET_KEY', 'changeme')

DEBUG = bool(int(os.environ.get('DEBUG', 0)))

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'core',
    'app',
    'integrator',
    'harness',
]

# No persistence beyond flat files.
DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Logging
# https://docs.djangoproject.com/en/3.2/topics/logging/

LOG_LEVEL = os.environ.get('LOG_LEVEL', 'WARNING')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{asctime} {levelname} {name}: {message}',
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
        name: {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        }
        for name in ('core', 'integrator', 'harness')
    },
}


# Nonlinear solver of the LIM(k, s) step

LIM_SOLVER = {
    'kind': os.environ.get('LIM_SOLVER_KIND', 'blended_magnetic'),
    'tol': float(os.environ.get('LIM_SOLVER_TOL', '1e-14')),
    'max_iter': int(os.environ.get('LIM_SOLVER_MAX_ITER', '100')),
}


# Experiment harness

HARNESS_DEFAULTS = {
    'problem': os.environ.get('HARNESS_PROBLEM', 'ex1'),
    'method': os.environ.get('HARNESS_METHOD', 'lim'),
    's': int(os.environ.get('HARNESS_S', '2')),
    'h': float(os.environ.get('HARNESS_H', '0.01')),
    't_final': float(os.environ.get('HARNESS_T_FINAL', '100')),
    'record_every': int(os.environ.get('HARNESS_RECORD_EVERY', '1')),
    'seed': int(os.environ.get('HARNESS_SEED', '0')),
}

# Reference trajectories: LIM(k, s) with the finest grid step / refine,
# accepted when halving that step moves the states by less than tolerance.
HARNESS_REFERENCE = {
    'k': int(os.environ.get('HARNESS_REFERENCE_K', '12')),
    's': int(os.environ.get('HARNESS_REFERENCE_S', '6')),
    'refine': int(os.environ.get('HARNESS_REFERENCE_REFINE', '8')),
    'tolerance': float(os.environ.get('HARNESS_REFERENCE_TOL', '1e-12')),
}

HARNESS_WORKERS = int(os.environ.get('HARNESS_WORKERS', '4'))

HARNESS_SYMMETRY = {
    'trials': int(os.environ.get('HARNESS_SYMMETRY_TRIALS', '20')),
    'radius': float(os.environ.get('HARNESS_SYMMETRY_RADIUS', '0.1')),
    'boris_tolerance': float(
        os.environ.get('HARNESS_SYMMETRY_BORIS_TOL', '1e-12')),
}

HARNESS_CONVERGE = {
    'problem': os.environ.get('HARNESS_CONVERGE_PROBLEM', 'ex2'),
    'methods': os.environ.get(
        'HARNESS_CONVERGE_METHODS', 'boris,lim(4,2),lim(6,3)'),
    'n_list': os.environ.get('HARNESS_CONVERGE_N_LIST', '1,2,4,8,16'),
    'h0': float(os.environ.get('HARNESS_CONVERGE_H0', '0.05')),
    't_final': float(os.environ.get('HARNESS_CONVERGE_T_FINAL', '25')),
}

# The full Hamiltonian-drift horizon is only used with --full-horizon.
HARNESS_DRIFT = {
    't_final': float(os.environ.get('HARNESS_DRIFT_T_FINAL', '1e3')),
    'full_horizon': float(
        os.environ.get('HARNESS_DRIFT_FULL_HORIZON', '3e4')),
    'window': float(os.environ.get('HARNESS_DRIFT_WINDOW', '10')),
}
