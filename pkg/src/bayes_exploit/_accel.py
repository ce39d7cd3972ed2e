"""Numba switch for the hot kernels.

Set ``BAYES_EXPLOIT_DISABLE_NUMBA=1`` to force the pure-numpy path. The
flag is read once at import time.
"""

from __future__ import annotations

import os

_DISABLED = os.environ.get("BAYES_EXPLOIT_DISABLE_NUMBA", "").strip().lower() in {
    "1",
    "true",
    "yes",
    "on",
}

try:
    from numba import njit as _numba_njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba_njit = None
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and not _DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity decorator otherwise.

    Kernels are always compiled when numba is present so both paths stay
    testable in one process; ``USE_NUMBA`` only picks the default route.
    """
    if NUMBA_AVAILABLE:
        return _numba_njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn
