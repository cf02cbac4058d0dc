"""Computation and verification toolkit for the Erdos-Hooley Delta-function.

Exact divisor-window statistics (Delta, moments M_q), weighted moment
sweeps over n <= x, a Monte Carlo model with independent prime inclusion,
the {-1,0,1} linear-form combinatorics, and the associated consistency
checks, behind a compiled-kernel/pure-Python dual backend.
"""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
