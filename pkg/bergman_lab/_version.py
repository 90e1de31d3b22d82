# coding: utf-8
from importlib import metadata

DISTRIBUTION_NAME = 'bergman-lab'


def get_versions() -> dict:
    """
    Return the installed version of the distribution.

    Falls back to ``0+unknown`` when the package is imported from a source
    tree that was never installed.
    """
    try:
        version = metadata.version(DISTRIBUTION_NAME)
    except metadata.PackageNotFoundError:
        version = '0+unknown'
    return {'version': version}
