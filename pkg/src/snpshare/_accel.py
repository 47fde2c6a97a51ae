"""Numba toggle.

Kernels are written twice: an ``@njit`` loop version and a vectorised numpy
version. ``SNPSHARE_DISABLE_NUMBA=1`` (or a missing numba install) selects
the numpy path. Both paths are always importable so tests and benchmarks can
compare them directly.
"""
import os

_FLAG = os.environ.get("SNPSHARE_DISABLE_NUMBA", "").strip().lower()

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)

    def wrap(fn):
        return fn

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return wrap
