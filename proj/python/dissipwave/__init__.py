"""Transverse Robin spectra and damped Schroedinger evolution on a strip."""

from ._core import *  # noqa: F401,F403
from ._core import SolverError, __doc__  # noqa: F401

__version__ = "0.1.0"
