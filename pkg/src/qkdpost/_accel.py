"""Backend selection for the hot numeric kernels.

The package ships two implementations of every performance-critical kernel:
a numba ``@njit`` version and a pure-numpy fallback.  Selection happens once
at import time from the environment variable ``QKDPOST_BACKEND``:

* ``auto``  (default) use numba when it is importable, numpy otherwise
* ``numba`` require numba, raise if it is missing
* ``numpy`` force the pure-numpy path even when numba is installed

``benchmarks/bench_backends.py`` times both paths side by side.
"""

import os

_VALID = ("auto", "numba", "numpy")

BACKEND_ENV = "QKDPOST_BACKEND"

_requested = os.environ.get(BACKEND_ENV, "auto").strip().lower()
if _requested not in _VALID:
    raise ValueError(
        f"{BACKEND_ENV}={_requested!r} is not one of {_VALID}"
    )

try:
    from numba import njit as _numba_njit

    NUMBA_AVAILABLE = True
except ImportError:
    NUMBA_AVAILABLE = False

if _requested == "numba" and not NUMBA_AVAILABLE:
    raise ImportError(
        f"{BACKEND_ENV}=numba but numba is not installed "
        "(pip install qkdpost[accel])"
    )

USE_NUMBA = NUMBA_AVAILABLE and _requested != "numpy"


def njit(*args, **kwargs):
    """numba.njit when the accelerated backend is active, identity otherwise."""
    if USE_NUMBA:
        return _numba_njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]

    def decorator(func):
        return func

    return decorator


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
