"""Energy-sharing market equilibrium engine."""

from ._core import *  # noqa: F401,F403
from ._core import EshareError, run_command

__all__ = [name for name in dir() if not name.startswith("_")]
