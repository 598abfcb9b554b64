"""Kernel backend selection.

``ENTROFLOW_BACKEND=numpy`` forces the pure-numpy path; anything else (or
unset) uses numba when it imports cleanly.
"""

import os

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

_VALID = ("numba", "numpy")


def _initial_backend():
    requested = os.environ.get("ENTROFLOW_BACKEND", "").strip().lower()
    if requested == "numpy" or not HAS_NUMBA:
        return "numpy"
    return "numba"


_backend = _initial_backend()


def get_backend():
    return _backend


def set_backend(name):
    """Switch backend at runtime (tests and benchmarks use this)."""
    global _backend
    name = name.lower()
    if name not in _VALID:
        raise ValueError(f"unknown backend {name!r}; expected one of {_VALID}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    _backend = name


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, otherwise a no-op decorator."""
    if HAS_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def resolve_threads(default=0):
    """Worker count from ``ENTROFLOW_THREADS`` (0 or unset means auto)."""
    raw = os.environ.get("ENTROFLOW_THREADS", str(default)).strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"ENTROFLOW_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("ENTROFLOW_THREADS must be >= 0")
    if n == 0:
        n = os.cpu_count() or 1
    return n
