"""Exact series arithmetic for real quadratic function fields: periods, quantum exponentials, Hayes polynomials and trace certificates."""

__version__ = "0.1.0"
