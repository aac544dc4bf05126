"""JIT selection.

Kernels are compiled with numba unless ``UAVLOC_DISABLE_NUMBA`` is set to a
non-empty value other than ``0``, or numba is not importable.  In that case
the same kernel source runs as plain Python/numpy.
"""

import os

_flag = os.environ.get("UAVLOC_DISABLE_NUMBA", "").strip()
_disabled = _flag not in ("", "0")

try:
    if _disabled:
        raise ImportError
    import numba

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False


def jit(func):
    """Compile ``func`` with ``numba.njit`` when acceleration is enabled."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def backend():
    return "numba" if HAVE_NUMBA else "numpy"
