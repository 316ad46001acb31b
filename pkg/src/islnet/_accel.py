"""Optional numba acceleration.

Set ``ISLNET_NUMBA=0`` to force the pure-numpy kernels even when numba is
installed. The flag is read once, at import time.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("ISLNET_NUMBA", "1").strip().lower() not in {
    "0",
    "false",
    "no",
    "off",
}


def try_njit(func=None, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise.

    Compilation is lazy, so decorating costs nothing until the first call.
    """
    def wrap(f):
        if not HAVE_NUMBA:
            return f
        return numba.njit(**kwargs)(f)

    if func is None:
        return wrap
    return wrap(func)
