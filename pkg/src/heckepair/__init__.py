"""Pair correlation of Hecke angles: kernels, trace-formula averages and Monte Carlo oracles."""
from ._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
