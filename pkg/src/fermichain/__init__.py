"""Quasi-free states of the XY chain and their entanglement diagnostics."""

__version__ = "0.1.0"
