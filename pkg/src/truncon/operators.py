"""Lower-triangular Toeplitz realization of truncated convolution operators.

A Kernel stores the first column k of an N x N lower-triangular Toeplitz
matrix together with a separate log-scale, so the operator represented is
exp(log_scale) * Toeplitz(k).  All renormalizing operations (compose, power,
add, scale, exp, log) bring max|k| back into [0.5, 2] and push the magnitude
into log_scale; orbit norms of interest grow like exp(2*sqrt(n)), which
overflows doubles near n ~ 1e5 without this split.

Two convolution paths are kept deliberately: a radix-2 FFT path (length-2N
cyclic convolution with zero padding) used by default, and the direct O(N^2)
path as the oracle.  They must agree to 1e-10 in relative terms; the test
suite asserts this.

The leading run of exact zeros in k is tracked through every operation and
re-zeroed after FFT convolutions.  This keeps nilpotency bit-exact: a kernel
supported on [a, 1) raised to the first power n with n*a >= 1 is identically
zero, not FFT noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import gamma as complex_gamma

from ._accel import truncated_convolution_direct
from .errors import InvalidSpec, NumericalFailure
from .grid import GridFunction, leading_zero_count, multiply_by_argument

RENORM_LOW = 0.5
RENORM_HIGH = 2.0

# Stop exp/log series once the running term falls below this relative size.
SERIES_RELATIVE_FLOOR = 1e-16


@dataclass(frozen=True)
class Kernel:
    """First Toeplitz column k plus a log-scale factor.

    (T f)[i] = exp(log_scale) * sum_{m<=i} k[m] f[i-m].  The diagonal entry
    k[0] * exp(log_scale) is the single spectral value of the operator.
    Instances are immutable; the cached FFT of the padded column makes
    repeated applications cheap.
    """

    N: int
    k: np.ndarray
    log_scale: float = 0.0

    def __post_init__(self):
        col = np.array(self.k, dtype=np.complex128)
        if col.shape != (self.N,):
            raise ValueError(f"kernel column must have length {self.N}")
        if not np.all(np.isfinite(col)):
            raise ValueError("kernel column must be finite")
        col.setflags(write=False)
        object.__setattr__(self, "k", col)
        object.__setattr__(self, "log_scale", float(self.log_scale))

    @cached_property
    def _fft(self):
        return np.fft.fft(self.k, 2 * self.N)

    @property
    def is_zero(self):
        return not self.k.any()

    @property
    def diagonal_value(self):
        """k[0] * exp(log_scale); the spectrum of the operator is this singleton."""
        return complex(self.k[0] * math.exp(self.log_scale)) if not self.is_zero else 0j

    def to_json(self):
        return {
            "N": self.N,
            "log_scale": self.log_scale,
            "k": [[float(c.real), float(c.imag)] for c in self.k],
        }

    @classmethod
    def from_json(cls, obj):
        try:
            ks = np.array(
                [complex(re, im) for re, im in obj["k"]], dtype=np.complex128
            )
            return cls(int(obj["N"]), ks, float(obj["log_scale"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpec(f"malformed kernel JSON: {exc}") from exc


def identity_kernel(N):
    k = np.zeros(N, dtype=np.complex128)
    k[0] = 1.0
    return Kernel(N, k)


def zero_kernel(N):
    return Kernel(N, np.zeros(N, dtype=np.complex128))


def _renormalized(raw, log_scale, N):
    peak = np.max(np.abs(raw)) if raw.size else 0.0
    if peak == 0.0 or not np.isfinite(peak):
        if not np.isfinite(peak):
            raise NumericalFailure("kernel column overflowed despite renormalization")
        return zero_kernel(N)
    return Kernel(N, raw / peak, log_scale + math.log(peak))


def _conv_fft(a_fft, b, n):
    full = np.fft.ifft(a_fft * np.fft.fft(b, 2 * n))
    return full[:n]


def _check_sizes(N1, N2):
    if N1 != N2:
        raise ValueError(f"grid sizes differ: {N1} vs {N2}")


def apply(T, f, method="fft"):
    """Apply the kernel to a grid function.

    method "fft" is the default O(N log N) path; "direct" is the O(N^2)
    oracle.  Entries in the exact-zero prefix of the result (kernel lead +
    function lead) are forced to zero so truncated translations annihilate
    functions exactly.
    """
    _check_sizes(T.N, f.N)
    lead = min(T.N, leading_zero_count(T.k) + leading_zero_count(f.values))
    if lead >= T.N:
        return GridFunction(T.N, np.zeros(T.N, dtype=np.complex128))
    if method == "fft":
        out = _conv_fft(T._fft, f.values, T.N)
    elif method == "direct":
        out = truncated_convolution_direct(T.k, f.values, T.N)
    else:
        raise ValueError(f"unknown convolution method {method!r}")
    out[:lead] = 0.0
    scale = math.exp(T.log_scale) if T.log_scale < 700.0 else math.inf
    out = out * scale
    if not np.all(np.isfinite(out)):
        raise NumericalFailure(
            "kernel application overflowed; apply works on moderate log-scales only"
        )
    return GridFunction(T.N, out)


def compose(T1, T2, method="fft"):
    """Kernel of the operator product: truncated convolution of the columns.

    Operands are put into a canonical order first, so compose(T1, T2) and
    compose(T2, T1) run the identical computation and agree bit for bit.
    """
    _check_sizes(T1.N, T2.N)
    N = T1.N
    if T2.k.tobytes() < T1.k.tobytes():
        T1, T2 = T2, T1
    lead = min(N, leading_zero_count(T1.k) + leading_zero_count(T2.k))
    if lead >= N or T1.is_zero or T2.is_zero:
        return zero_kernel(N)
    if method == "fft":
        raw = _conv_fft(T1._fft, T2.k, N)
    elif method == "direct":
        raw = truncated_convolution_direct(T1.k, T2.k, N)
    else:
        raise ValueError(f"unknown convolution method {method!r}")
    raw[:lead] = 0.0
    return _renormalized(raw, T1.log_scale + T2.log_scale, N)


def scale(T, c):
    """Kernel of c * T."""
    c = complex(c)
    if c == 0 or T.is_zero:
        return zero_kernel(T.N)
    return _renormalized(T.k * c, T.log_scale, T.N)


def add(T1, T2):
    """Kernel of T1 + T2 (log-scales reconciled before the sum)."""
    _check_sizes(T1.N, T2.N)
    if T1.is_zero:
        return T2
    if T2.is_zero:
        return T1
    ref = max(T1.log_scale, T2.log_scale)
    raw = T1.k * math.exp(T1.log_scale - ref) + T2.k * math.exp(T2.log_scale - ref)
    return _renormalized(raw, ref, T1.N)


def power(T, n, should_abort=None, method="fft"):
    """n-th power by repeated squaring, renormalizing at every step.

    log_scale absorbs the magnitude, so n up to 1e6 stays in range.  A
    callable `should_abort` is polled once per squaring step; raising from
    it cancels the loop (cooperative cancellation for long runs).  Use
    method="direct" when the power's column spans a dynamic range beyond
    what the FFT path's absolute accuracy can represent (rapid decay).
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"power expects a positive integer exponent, got {n}")
    n = int(n)
    if n == 1:
        return T
    result = None
    base = T
    while n:
        if should_abort is not None:
            should_abort()
        if n & 1:
            result = base if result is None else compose(result, base, method=method)
        n >>= 1
        if n:
            base = compose(base, base, method=method)
    return result


def riemann_liouville(z, N):
    """Fractional-integration kernel of complex order z, Re z > 0.

    Product-integration weights for piecewise-constant interpolation:
    k_m = h^z ((m+1)^z - m^z) / Gamma(z+1), the exact cell integrals of the
    density x^(z-1)/Gamma(z).  Partial sums of the weights telescope, so the
    kernel is exact on constants; z = 1 reproduces the cumulative-sum
    (Volterra) kernel.
    """
    z = complex(z)
    if z.real <= 0:
        raise InvalidSpec(f"fractional order needs Re z > 0, got {z}")
    return Kernel(N, fractional_cell_weights(z, N))


def fractional_cell_weights(z, N):
    """Cell integrals of x^(z-1)/Gamma(z) over [m/N, (m+1)/N), m = 0..N-1."""
    z = complex(z)
    powers = np.zeros(N + 1, dtype=np.complex128)
    powers[1:] = np.exp(z * np.log(np.arange(1, N + 1, dtype=np.float64)))
    hz = np.exp(-z * math.log(N))
    return np.diff(powers) * (hz / complex_gamma(z + 1))


def volterra_kernel(N):
    """Kernel of cumulative integration: all cells carry weight 1/N."""
    return Kernel(N, np.full(N, 1.0 / N, dtype=np.complex128))


def operator_norm_1(T):
    """log of the column-sum norm (the induced L^1 and L-inf operator norm).

    For a lower-triangular Toeplitz matrix the maximal column absolute sum
    is the full first column, so the norm is sum |k_m|; the return value is
    log_scale + ln(sum), with -inf for the zero kernel.
    """
    s = float(np.sum(np.abs(T.k)))
    if s == 0.0:
        return -math.inf
    return T.log_scale + math.log(s)


def rel_distance(T1, T2):
    """Column-sum distance of two kernels relative to the larger norm."""
    diff = add(T1, scale(T2, -1.0))
    d = operator_norm_1(diff)
    ref = max(operator_norm_1(T1), operator_norm_1(T2))
    if ref == -math.inf:
        return 0.0 if d == -math.inf else math.inf
    return math.exp(d - ref) if d > -math.inf else 0.0


def _series_accumulate(first_term, next_term, N, max_terms):
    """Sum a kernel series with log-scale-aware accumulation.

    next_term(term, index) produces term_{index} from term_{index-1}.
    Stops when the term norm falls SERIES_RELATIVE_FLOOR below the
    accumulated norm, the term vanishes, or max_terms elapse.
    """
    acc_k = first_term.k.copy()
    acc_ls = first_term.log_scale
    term = first_term
    for j in range(2, max_terms + 1):
        term = next_term(term, j)
        t_norm = operator_norm_1(term)
        if t_norm == -math.inf:
            break
        acc_norm = acc_ls + math.log(float(np.sum(np.abs(acc_k))) + 1e-300)
        if t_norm < acc_norm + math.log(SERIES_RELATIVE_FLOOR):
            break
        acc_k += term.k * math.exp(term.log_scale - acc_ls)
        peak = np.max(np.abs(acc_k))
        if peak > 1e100:  # keep headroom; fold magnitude into acc_ls
            acc_k /= peak
            acc_ls += math.log(peak)
    return _renormalized(acc_k, acc_ls, N)


def op_exp(A):
    """exp(A) = sum A^n / n! as a kernel, truncated at relative 1e-16."""
    N = A.N
    ident = identity_kernel(N)
    if A.is_zero:
        return ident
    first = add(ident, A)

    state = {"pow": A}

    def next_term(_, j):
        nxt = scale(compose(state["pow"], A), 1.0 / j)
        state["pow"] = nxt
        return nxt

    # seed the accumulator with I + A and continue from A^2/2!
    return _series_accumulate(first, next_term, N, 4 * N)


def op_log_of_identity_plus(S):
    """log(I + S) = sum (-1)^(n-1) S^n / n, valid for spectral radius < 1.

    The spectral radius of a triangular Toeplitz kernel is its diagonal
    entry |k[0] exp(log_scale)|; anything >= 1 is rejected.
    """
    if S.is_zero:
        return zero_kernel(S.N)
    if abs(S.diagonal_value) >= 1.0:
        raise InvalidSpec(
            "log(I+S) requires spectral radius |diagonal| < 1, got "
            f"{abs(S.diagonal_value):.6g}"
        )
    N = S.N

    state = {"pow": S}

    def next_term(_, j):
        nxt = compose(state["pow"], S)
        state["pow"] = nxt
        return scale(nxt, (-1.0) ** (j - 1) / j)

    return _series_accumulate(S, next_term, N, 4 * N)


def commutator_with_M(T, f):
    """[T, M] applied to f: T(Mf) - M(Tf), M being multiplication by x."""
    _check_sizes(T.N, f.N)
    tm = apply(T, multiply_by_argument(f))
    mt = multiply_by_argument(apply(T, f))
    return GridFunction(T.N, tm.values - mt.values)
