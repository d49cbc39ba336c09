"""Hot inner kernel: direct truncated convolution of complex vectors.

The direct O(N^2) path is the oracle against which the FFT path is checked,
and it dominates runtime whenever the oracle is exercised at large N.  A
numba-compiled loop is used when available; set TRUNCON_BACKEND=numpy to
force the pure-numpy fallback (np.convolve, also an exact direct method).
"""

import os
import warnings

import numpy as np

_requested = os.environ.get("TRUNCON_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "numba", "numpy"):
    warnings.warn(
        f"TRUNCON_BACKEND={_requested!r} not recognized; using 'auto'",
        stacklevel=1,
    )
    _requested = "auto"


def _conv_lower_numpy(a, b, n):
    return np.convolve(a, b)[:n]


_conv_lower_numba = None
if _requested in ("auto", "numba"):
    try:
        import numba

        # no eager signature: kernel columns are read-only arrays and numba
        # specializes on mutability, so lazy compilation covers both flavors
        @numba.njit(cache=True, fastmath=True)
        def _conv_lower_numba(a, b, n):  # noqa: F811 - intentional rebind
            out = np.zeros(n, dtype=np.complex128)
            la = a.shape[0]
            lb = b.shape[0]
            for i in range(n):
                lo = i - lb + 1
                if lo < 0:
                    lo = 0
                hi = i if i < la - 1 else la - 1
                acc = 0j
                for m in range(lo, hi + 1):
                    acc += a[m] * b[i - m]
                out[i] = acc
            return out

    except ImportError:
        if _requested == "numba":
            raise
        _conv_lower_numba = None

BACKEND = "numba" if _conv_lower_numba is not None else "numpy"


def truncated_convolution_direct(a, b, n):
    """First `n` coefficients of the convolution of 1-D complex arrays."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    b = np.ascontiguousarray(b, dtype=np.complex128)
    if BACKEND == "numba":
        return _conv_lower_numba(a, b, n)
    return _conv_lower_numpy(a, b, n)
