"""Blow-up resolution, Hardy-type inequality checks and growth bounds for real polynomials."""

from .poly import Polynomial, parse, format_poly, sum_sq_partials

__version__ = "0.1.0"

__all__ = ["Polynomial", "parse", "format_poly", "sum_sq_partials", "__version__"]
