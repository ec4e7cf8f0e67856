"""Sampling-series laboratory for bandlimited signals."""

__version__ = "0.1.0"
