"""Switch between numba-compiled kernels and the pure-numpy fallback.

Set ``BENFORD_SCAN_JIT=0`` before import to force the numpy path (useful for
debugging and for environments without numba). Both paths are importable
regardless of the flag so they can be compared directly.
"""

from __future__ import annotations

import os

_FLAG = os.environ.get("BENFORD_SCAN_JIT", "1").strip().lower()

try:
    from numba import njit as _numba_njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba_njit = None
    HAVE_NUMBA = False

JIT_ENABLED = HAVE_NUMBA and _FLAG not in ("0", "false", "no", "off")


def njit(func=None, **kwargs):
    """``numba.njit`` when numba is importable, otherwise the identity decorator.

    This wraps regardless of ``JIT_ENABLED``; dispatch between the compiled
    kernel and the numpy fallback happens in :mod:`benford_scan._kernels`.
    """
    kwargs.setdefault("cache", True)
    if _numba_njit is None:
        if func is not None:
            return func
        return lambda f: f
    if func is not None:
        return _numba_njit(**kwargs)(func)
    return _numba_njit(**kwargs)
