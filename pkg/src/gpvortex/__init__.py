"""Numerics for rotating Bose-Einstein condensates in anharmonic traps."""
from .errors import DomainError, SolverError
from .params import ReducedParams, TrapParams

__all__ = ["DomainError", "SolverError", "ReducedParams", "TrapParams"]
__version__ = "0.1.0"
