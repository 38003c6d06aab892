"""Access to the GRAPHON_ENTROPY settings dictionary."""
from django.conf import settings

DEFAULTS = {
    'QUAD_POINTS': 2048,
    'CLIP_EPSILON': 1e-12,
    'USVT_ETA': 0.01,
    'USVT_TOLERANCE': 1e-8,
    'GHAT_NORMALIZATION': 'configuration',
    'FIT_RESTARTS': 1,
    'FIT_MAX_SWEEPS': 100,
    'SPARSE_LOG_EXPONENT': 3.5,
    'F2_A0': 0.25,
    'F2_A1': 0.15,
    'F2_ALPHA1': 3.0,
    'GRID_POINTS': 513,
    'BETA_TOLERANCE': 1e-12,
    'OUTPUT_DIR': 'output',
}


def engine_setting(name):
    """
    Return one engine setting, falling back to the built-in default.

    Args:
        name: Key of the GRAPHON_ENTROPY dictionary, e.g. 'QUAD_POINTS'

    Returns:
        The configured value
    """
    configured = getattr(settings, 'GRAPHON_ENTROPY', {})
    if name in configured:
        return configured[name]
    return DEFAULTS[name]
