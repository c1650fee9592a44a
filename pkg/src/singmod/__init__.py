"""Computational toolkit for multiplicative relations among singular moduli."""

__version__ = "0.1.0"
