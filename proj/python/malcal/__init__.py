"""Discrete Malliavin calculus on random walks."""

from ._malcal import *  # noqa: F401,F403
from ._malcal import __version__  # noqa: F401
