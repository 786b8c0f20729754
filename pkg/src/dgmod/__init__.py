"""Exact computations with finite-dimensional DG algebras and DG modules."""

__version__ = "0.1.0"
