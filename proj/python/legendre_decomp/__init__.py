"""Legendre decomposition of nonnegative tensors."""

from ._core import (
    DomainError,
    NumericalError,
    ParseError,
    basis,
    decompose,
    fit_boltzmann,
    load_tensor,
    normalize,
    reference_projection,
    rmse,
    synthetic_tensor,
)

__all__ = [
    "DomainError",
    "NumericalError",
    "ParseError",
    "basis",
    "decompose",
    "fit_boltzmann",
    "load_tensor",
    "normalize",
    "reference_projection",
    "rmse",
    "synthetic_tensor",
]
