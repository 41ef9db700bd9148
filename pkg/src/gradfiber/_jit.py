"""Numba switch.

Every hot kernel in the package is decorated with :func:`njit` from this
module.  Setting ``GRADFIBER_NUMBA=0`` in the environment (before the package
is imported) turns the decorator into a no-op so the very same kernels run as
plain numpy/Python code.  The compiled and the interpreted path are compared
in ``gradfiber.perf`` and in the test-suite.
"""
import os
import warnings

_FLAG = os.environ.get("GRADFIBER_NUMBA", "1").strip().lower()

try:  # pragma: no cover - numba is a hard dependency, but keep import-safe
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None

# an old system TBB only means numba picks another threading layer
warnings.filterwarnings("ignore", message="The TBB threading layer", module="numba")

ENABLED = _numba is not None and _FLAG not in ("0", "false", "off", "no")


def njit(*args, **kwargs):
    """``numba.njit`` when enabled, identity decorator otherwise."""
    kwargs.setdefault("cache", True)
    if not ENABLED:
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f
    if len(args) == 1 and callable(args[0]):
        return _numba.njit(**kwargs)(args[0])
    return _numba.njit(*args, **kwargs)


# numba only recognizes its own prange object inside compiled loops
prange = _numba.prange if ENABLED else range


def python_version(func):
    """Return the un-jitted Python implementation of a kernel."""
    return getattr(func, "py_func", func)


def set_threads(n):
    """Set the numba worker-thread count (no-op on the fallback path)."""
    if ENABLED and n:
        _numba.set_num_threads(max(1, min(int(n), _numba.config.NUMBA_NUM_THREADS)))
