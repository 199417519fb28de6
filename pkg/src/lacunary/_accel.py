"""Optional numba acceleration.

Set ``LACUNARY_DISABLE_NUMBA=1`` in the environment (before importing the
package) to force the pure-numpy code paths. The choice is made once at
import time; both paths are always importable when numba is installed so
they can be compared side by side.
"""
import os
import warnings

_FLAG = os.environ.get("LACUNARY_DISABLE_NUMBA", "").strip().lower()
DISABLED_BY_ENV = _FLAG in ("1", "true", "yes", "on")

try:
    import numba as _numba

    # an old system TBB only triggers a fallback to another threading layer
    warnings.filterwarnings("ignore", message=".*TBB.*", module=r"numba\..*")

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    _numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not DISABLED_BY_ENV


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity decorator otherwise."""
    if HAVE_NUMBA:
        return _numba.njit(*args, **kwargs)

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(func):
        return func

    return wrap


if HAVE_NUMBA:
    prange = _numba.prange
else:  # pragma: no cover
    prange = range


def set_threads(n):
    """Size the numba worker pool; no-op on the numpy path."""
    if n is None or not USE_NUMBA:
        return
    n = max(1, min(int(n), _numba.config.NUMBA_NUM_THREADS))
    _numba.set_num_threads(n)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
