"""Fractional Gagliardo energies on thin films and their dimension-reduction limits."""

__version__ = "0.1.0"

from .errors import DomainError, NumericalFailure, ThinFracError, UnsupportedFamilyError, UsageError  # noqa: E402
from .geometry import BaseDomain, FractionalParams, Shape, ThinFilm  # noqa: E402

__all__ = [
    "BaseDomain",
    "DomainError",
    "FractionalParams",
    "NumericalFailure",
    "Shape",
    "ThinFilm",
    "ThinFracError",
    "UnsupportedFamilyError",
    "UsageError",
    "__version__",
]
