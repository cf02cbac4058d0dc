"""Kernel backend selection.

The compiled extension `_ckern` is preferred; the pure-Python `_pykern`
is a drop-in fallback so the package works from a plain source checkout.
Set HDELTA_PURE=1 to force the fallback (used by the benchmark and by
the backend-equivalence tests).
"""

import os

from . import _pykern

if os.environ.get("HDELTA_PURE"):
    _impl = _pykern
else:
    try:
        from . import _ckern as _impl
    except ImportError:
        _impl = _pykern

BACKEND = _impl.BACKEND_NAME

spf_sieve = _impl.spf_sieve
factor_pairs = _impl.factor_pairs
divisor_logs_from_pairs = _impl.divisor_logs_from_pairs
delta_max = _impl.delta_max
delta_anchored_brute = _impl.delta_anchored_brute
delta_m2 = _impl.delta_m2
moments = _impl.moments
block_stats = _impl.block_stats
block_check_delta = _impl.block_check_delta
block_moments = _impl.block_moments


def available_backends():
    """Names of importable backends (for benchmarks and tests)."""
    names = ["python"]
    try:
        from . import _ckern  # noqa: F401

        names.insert(0, "compiled")
    except ImportError:
        pass
    return names


def get_module(name):
    if name == "python":
        return _pykern
    if name == "compiled":
        from . import _ckern

        return _ckern
    raise ValueError(f"unknown backend {name!r}")
