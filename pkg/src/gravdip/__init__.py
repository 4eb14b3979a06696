"""Gravitationally induced entanglement of two trapped masses with post-Newtonian couplings."""

from gravdip.errors import (
    ContractError,
    RegimeError,
    SpecError,
    TruncationError,
    ValidityError,
)
from gravdip.model import DerivedScales, PhysicalParams, derive_scales, dimensionless_point

__version__ = "0.1.0"

__all__ = [
    "ContractError",
    "DerivedScales",
    "PhysicalParams",
    "RegimeError",
    "SpecError",
    "TruncationError",
    "ValidityError",
    "derive_scales",
    "dimensionless_point",
]
