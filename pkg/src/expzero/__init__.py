"""Exact zero detection for exponential polynomials with algebraic data."""

__version__ = "0.1.0"
