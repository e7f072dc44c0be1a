"""Symanzik polynomials of two-loop graphs and the singular geometry of the massive double box."""

__version__ = "0.1.0"
