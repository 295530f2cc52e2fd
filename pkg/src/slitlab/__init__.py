"""Laplace eigenvalues on planar domains with small slits."""

__version__ = "0.1.0"
