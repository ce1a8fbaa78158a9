"""Spectral computations for the minimal tori M_{m,n} in the 5-sphere."""

from .geometry import TorusParams, coprime_pairs

__all__ = ["TorusParams", "coprime_pairs"]
__version__ = "0.1.0"
