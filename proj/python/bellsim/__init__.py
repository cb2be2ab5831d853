"""Homodyne CHSH tests with photon-subtracted two-mode squeezed vacuum."""

from ._bellsim import *  # noqa: F401,F403
from ._bellsim import NumericalError, SchemeError, __doc__  # noqa: F401

__version__ = "0.1.0"
