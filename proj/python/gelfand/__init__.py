"""Radial generalized Gelfand problem L(u) + lambda e^{f(u)} = 0."""

from ._gelfand import *  # noqa: F401,F403
from ._gelfand import (  # noqa: F401
    Error,
    DomainError,
    ConfigError,
    NumericError,
    Nonlinearity,
    OperatorParams,
)

__all__ = [name for name in dir() if not name.startswith("_")]
