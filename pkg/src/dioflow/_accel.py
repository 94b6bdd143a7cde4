"""JIT switch for the numeric kernels.

Kernels are written once in numba-compatible numpy. Setting
``DIOFLOW_DISABLE_JIT=1`` before import (or running without numba installed)
leaves them as plain Python functions, which is slower but produces the same
numbers and is handy for debugging.
"""

import os
import warnings

_flag = os.environ.get("DIOFLOW_DISABLE_JIT", "").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError
    import numba
    from numba import njit as _njit, prange

    JIT_ENABLED = True
    # numba probes TBB first and warns when the system copy is too old
    warnings.filterwarnings("ignore", message="The TBB threading layer")
except ImportError:
    numba = None
    JIT_ENABLED = False
    prange = range


def njit(*args, **kwargs):
    """``numba.njit`` when JIT is enabled, otherwise the identity decorator."""
    if JIT_ENABLED:
        kwargs.setdefault("cache", True)
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def set_workers(count):
    """Set the number of threads used by parallel kernels (no-op without JIT)."""
    if JIT_ENABLED and count:
        numba.set_num_threads(max(1, min(int(count), numba.config.NUMBA_NUM_THREADS)))
