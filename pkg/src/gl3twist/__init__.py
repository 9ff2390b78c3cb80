"""Numerical toolkit for first moments of quadratic twists of GL(3) L-functions."""

__version__ = "0.1.0"
