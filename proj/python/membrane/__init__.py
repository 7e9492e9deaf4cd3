"""Axisymmetric two-phase membranes: energies, recovery sequences and gradient flows."""

from ._core import *  # noqa: F401,F403
from ._core import MembraneError, Variant  # noqa: F401

__all__ = [name for name in dir() if not name.startswith("_")]
