"""Enumeration cap shared by hom-set indexing, carriers, and vertex counts."""

import os

DEFAULT_CAP = 10**6
_CAP_FLOOR = 10**3
_CAP_CEILING = 10**7


def enumeration_cap():
    """Active cap on enumerated set sizes.

    Reads CI_ENGINE_CAP from the environment, clamped to
    [10^3, 10^7]; unset or unparsable values fall back to 10^6.
    """
    raw = os.environ.get("CI_ENGINE_CAP")
    if raw is None:
        return DEFAULT_CAP
    try:
        value = int(raw)
    except ValueError:
        return DEFAULT_CAP
    return min(max(value, _CAP_FLOOR), _CAP_CEILING)
