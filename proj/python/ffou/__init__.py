"""Fractional Ornstein-Uhlenbeck process with stochastic forcing."""

from ._ffou import *  # noqa: F401,F403
from ._ffou import NumericalError, __doc__  # noqa: F401
