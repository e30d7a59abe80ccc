"""Steady states of the full cross-diffusion limit of the SKT competition model."""

from ._core import *  # noqa: F401,F403
from ._core import Error, NumericalError, UsageError, __doc__  # noqa: F401

__version__ = "0.1.0"
