"""Projection constants of spaces of trigonometric and Dirichlet polynomials."""

__version__ = "0.1.0"
