"""Backend selection for the numeric kernels.

Set ``FIBERTHRESH_DISABLE_NUMBA=1`` to force the pure-numpy path. The numba
path is also skipped silently when numba cannot be imported.
"""

import os

_FLAG = "FIBERTHRESH_DISABLE_NUMBA"


def _numba_requested():
    value = os.environ.get(_FLAG, "").strip().lower()
    return value not in ("1", "true", "yes", "on")


try:
    if not _numba_requested():
        raise ImportError("numba disabled by " + _FLAG)
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"
