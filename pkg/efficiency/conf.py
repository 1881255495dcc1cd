"""
Access to the ``EFFICIENCY`` settings dict.

The solver modules are importable without a configured Django project (for
example from a notebook), so every lookup falls back to the built-in defaults.
"""
from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

DEFAULTS = {
    'PIVOT_EPS': 1e-10,
    'REFACTOR_INTERVAL': 20,
    'NODE_LIMIT': 10 ** 6,
    'ORACLE_MAX_EFFICIENT': 16,
    'SLACK_ROW_TOLERANCE_FACTOR': 10,
    'DEFAULT_METHOD': 'relaxed-lp',
    'SIGNIFICANT_DIGITS': 12,
    'JOBS': 1,
}


def get_setting(name):
    """Return ``settings.EFFICIENCY[name]``, or its default."""
    if name not in DEFAULTS:
        raise KeyError(f"Unknown efficiency setting: {name}")
    try:
        user_settings = getattr(settings, 'EFFICIENCY', {})
    except ImproperlyConfigured:
        user_settings = {}
    return user_settings.get(name, DEFAULTS[name])
