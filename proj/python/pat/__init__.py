"""Photoacoustic forward solver and reconstructions in variable media."""

from ._pat import *  # noqa: F401,F403
from ._pat import NumericalError, FormatError  # noqa: F401
