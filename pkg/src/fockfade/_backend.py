"""Kernel backend selection.

The hot evolution loops in ``_kernels`` are written as plain Python functions
that numba can compile in nopython mode.  By default they are jitted; setting
the environment variable ``FOCKFADE_DISABLE_NUMBA=1`` keeps them as
interpreted numpy code (slow, but dependency-free and bit-identical in
results).  ``benchmarks/bench_kernels.py`` compares the two paths.
"""

import os

_flag = os.environ.get("FOCKFADE_DISABLE_NUMBA", "").strip().lower()
DISABLE_NUMBA = _flag in {"1", "true", "yes", "on"}

HAVE_NUMBA = False
if not DISABLE_NUMBA:
    try:
        import numba  # noqa: F401

        HAVE_NUMBA = True
    except ImportError:
        HAVE_NUMBA = False


def maybe_jit(func):
    """Compile ``func`` with numba when the backend is enabled."""
    if HAVE_NUMBA:
        import numba

        return numba.njit(cache=True, nogil=True)(func)
    return func
