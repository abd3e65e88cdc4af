"""Deterministic connected components in the low-space MPC model."""

__version__ = "0.1.0"
