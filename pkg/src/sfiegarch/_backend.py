"""Kernel backend selection.

Hot recursions ship in two flavours: a numba ``@njit`` build and a pure
numpy/python fallback.  The active flavour is chosen once at import time from
the ``SFIEGARCH_BACKEND`` environment variable:

* unset or ``"numba"``  -- use numba when importable, else fall back silently;
* ``"numpy"``           -- force the pure-numpy path (useful for debugging and
                           for the backend benchmark).
"""

import os
import warnings

_requested = os.environ.get("SFIEGARCH_BACKEND", "numba").strip().lower()

HAVE_NUMBA = False
if _requested != "numpy":
    try:
        from numba import njit  # noqa: F401

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - environment dependent
        if _requested == "numba" and "SFIEGARCH_BACKEND" in os.environ:
            warnings.warn("numba requested but not importable; using numpy kernels")

USE_NUMBA = HAVE_NUMBA and _requested != "numpy"
BACKEND = "numba" if USE_NUMBA else "numpy"


def jit_kernel(py_func):
    """Compile ``py_func`` with numba when the numba backend is active."""
    if USE_NUMBA:
        from numba import njit

        return njit(cache=True)(py_func)
    return py_func


def set_num_threads(n: int) -> None:
    """Limit numba's thread pool; a no-op on the numpy backend."""
    if USE_NUMBA and n >= 1:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
