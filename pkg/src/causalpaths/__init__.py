"""Timelike and causal homotopy classes of paths, numerically and combinatorially."""

__version__ = "0.1.0"
