"""Gaussian comparison bounds for minimum eigenvalues of random psd sums."""
from .matcore import RectMatrix, SymMatrix, ValidationError

__version__ = "0.1.0"

__all__ = ["RectMatrix", "SymMatrix", "ValidationError", "__version__"]
