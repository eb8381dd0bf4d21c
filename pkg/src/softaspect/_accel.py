"""Backend selection for the numeric kernels.

The environment variable ``SOFTASPECT_BACKEND`` picks the implementation
used by :mod:`softaspect.kernels` at import time:

* ``numba`` (default when numba is importable): ``@njit`` loop kernels.
* ``numpy``: vectorised pure-numpy fallbacks, no compilation.

:func:`set_backend` switches at runtime (tests and benchmarks use it).
"""
import os
import logging

logger = logging.getLogger(__name__)

try:
    import numba
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

BACKENDS = ("numba", "numpy")


def _initial_backend():
    requested = os.environ.get("SOFTASPECT_BACKEND", "numba").strip().lower() or "numba"
    if requested not in BACKENDS:
        raise ValueError(f"SOFTASPECT_BACKEND must be one of {BACKENDS}, got {requested!r}")
    if requested == "numba" and not HAS_NUMBA:
        logger.warning("numba not importable, falling back to numpy kernels")
        return "numpy"
    return requested


_backend = _initial_backend()


def get_backend():
    return _backend


def set_backend(name):
    """Select ``"numba"`` or ``"numpy"`` kernels; returns the previous backend."""
    global _backend
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; expected one of {BACKENDS}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    previous, _backend = _backend, name
    return previous


def use_numba():
    return _backend == "numba"


def njit(fn):
    """``numba.njit(cache=True)`` when available, identity otherwise."""
    if HAS_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn
