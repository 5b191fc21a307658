"""Invariant Nijenhuis operators on homogeneous spaces and integrability certificates."""

__version__ = "0.1.0"
