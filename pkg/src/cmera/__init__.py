"""Continuous MERA for free bosons on the line, half-line and with a conformal defect."""
from .errors import (CmeraError, DegreeOverflow, DimensionMismatch, DomainError,
                     IRDivergenceError, ToleranceNotMet)
from .profiles import Profile

__version__ = "0.1.0"

__all__ = ["CmeraError", "DegreeOverflow", "DimensionMismatch", "DomainError",
           "IRDivergenceError", "ToleranceNotMet", "Profile", "__version__"]
