"""Backend selection for the label-array kernels.

Set ``COFINITE_DISABLE_NUMBA=1`` to force the pure-numpy path.  The flag is
read once at import time.
"""

import os

_DISABLED = os.environ.get("COFINITE_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:
    _njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED


def jit(fn):
    """Compile ``fn`` with numba when it is available, else return it unchanged."""
    if _njit is None:
        return fn
    return _njit(cache=True, nogil=True)(fn)


def backend():
    return "numba" if USE_NUMBA else "numpy"
