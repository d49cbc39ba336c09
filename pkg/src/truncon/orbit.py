"""Orbit-norm dynamics: renormalized power iteration and its diagnostics.

The central object is the sequence L_n = ln ||T^n f||_p, produced by
normalizing the iterate at every step so nothing ever overflows.  On top of
it sit a growth-exponent estimator for orbits with L_n ~ c * n^(1/(r+1)), a
power-law fit for decaying tails, and the grow/shrink pair of norm regimes
exhibited by identity-plus-convolution kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpec, NumericalFailure
from .grid import GridFunction, norm
from .measure import Measure, to_kernel
from .operators import apply, compose, operator_norm_1

MIN_FIT_POINTS = 8


@dataclass(frozen=True)
class OrbitTrace:
    """log-norm sequence of a renormalized orbit.

    log_norms[n] = ln ||T^n f||_p for n = 0..n_max; -inf marks steps after
    the iterate collapsed to exact zero (nilpotent kernels).  state is the
    current normalized iterate, or None for operator-norm traces.
    """

    p: float
    log_norms: np.ndarray
    state: GridFunction | None

    def __post_init__(self):
        ln = np.asarray(self.log_norms, dtype=np.float64)
        ln.setflags(write=False)
        object.__setattr__(self, "log_norms", ln)

    @property
    def n_max(self):
        return len(self.log_norms) - 1


@dataclass(frozen=True)
class GrowthSpec:
    """Parameters (r, b, alpha, s) of the sub-exponential growth law."""

    r: float
    b: float
    alpha: float = 0.0
    s: float = 0.0

    def __post_init__(self):
        if self.r <= 0 or self.b <= 0:
            raise InvalidSpec("growth spec needs r > 0 and b > 0")
        if not -math.pi < self.alpha <= math.pi:
            raise InvalidSpec("alpha must lie in (-pi, pi]")
        if not 0.0 <= self.s < 1.0:
            raise InvalidSpec("support infimum s must lie in [0, 1)")

    @classmethod
    def from_json(cls, obj):
        try:
            return cls(
                r=float(obj["r"]),
                b=float(obj["b"]),
                alpha=float(obj.get("alpha", 0.0)),
                s=float(obj.get("s", 0.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpec(f"malformed growth spec: {exc}") from exc


def iterate_orbit(T, f, p, n_max, method="direct"):
    """Renormalized iteration state -> T state / ||.||_p, recording log norms.

    Terminates early when the iterate underflows to exact zero (possible for
    nilpotent kernels thanks to exact leading-zero tracking), recording -inf
    for every remaining step.

    The default convolution path is the direct one: growth kernels develop
    states whose small-x cells sit exp(-2 sqrt(n)) below the peak, and the
    FFT path's absolute noise floor would seed spurious mass there that the
    dynamics amplify ahead of the true orbit.  Pass method="fft" for
    bounded-dynamic-range orbits (decaying perturbed-identity kernels) when
    speed matters.
    """
    if n_max < 1:
        raise InvalidSpec("n_max must be at least 1")
    start = norm(f, p)
    if start == 0.0:
        raise InvalidSpec("orbit of the zero function is undefined")
    log_norms = np.empty(n_max + 1)
    log_norms[0] = math.log(start)
    state = f.scaled(1.0 / start)
    for n in range(1, n_max + 1):
        nxt = apply(T, state, method=method)
        step = norm(nxt, p)
        if step == 0.0:
            log_norms[n:] = -math.inf
            state = nxt
            break
        log_norms[n] = log_norms[n - 1] + math.log(step)
        state = nxt.scaled(1.0 / step)
    return OrbitTrace(p=float(p), log_norms=log_norms, state=state)


def operator_norm_orbit(T, n_max, method="direct"):
    """Trace of n -> log ||T^n|| in the column-sum norm (state-free).

    Direct composition by default: both rapidly decaying (quasinilpotent)
    and growing kernel powers develop columns whose dynamic range outruns
    the FFT path's absolute accuracy.
    """
    log_norms = np.empty(n_max + 1)
    log_norms[0] = 0.0
    current = None
    for n in range(1, n_max + 1):
        current = T if current is None else compose(current, T, method=method)
        log_norms[n] = operator_norm_1(current)
    return OrbitTrace(p=1.0, log_norms=log_norms, state=None)


def growth_limit_prediction(g):
    """Limiting value of ln||T^n f||_p / n^(1/(r+1)) for T = I + b e^{i alpha} V^r.

    (r+1) * b^(1/(r+1)) * ((1-s)/r)^(r/(r+1)) * cos_+(alpha/(r+1)), where
    s is the infimum of the support of f and cos_+(t) = max(cos t, 0).
    """
    e = 1.0 / (g.r + 1.0)
    t = g.alpha * e
    # the clipped cosine vanishes identically outside (-pi/2, pi/2)
    cplus = 0.0 if abs(t) >= math.pi / 2.0 else max(math.cos(t), 0.0)
    return (g.r + 1.0) * g.b**e * ((1.0 - g.s) / g.r) ** (g.r * e) * cplus


def growth_exponent(trace, r):
    """Scaled trend L_n / n^(1/(r+1)) and its two-point dyadic extrapolation.

    The trend is computed from L_n - L_0 so it is invariant under scaling
    of the initial function; the estimate is 2*trend(n_max) -
    trend(n_max//2).  Traces that hit -inf are rejected.
    """
    ln = trace.log_norms
    if np.any(np.isneginf(ln)):
        raise InvalidSpec("growth exponent undefined for collapsed (nilpotent) orbits")
    n_max = trace.n_max
    n = np.arange(len(ln), dtype=np.float64)
    trend = np.full(len(ln), np.nan)
    trend[1:] = (ln[1:] - ln[0]) / n[1:] ** (1.0 / (r + 1.0))
    estimate = 2.0 * trend[n_max] - trend[max(n_max // 2, 1)]
    return float(estimate), trend


def decay_floor_fit(trace):
    """Least-squares fit L_n - L_0 ~ -C n^beta over the trace's second half.

    Refuses (NumericalFailure) when the tail is not decreasing in trend;
    beta <= 1/2 is the regime compatible with decay floors satisfying
    sum ln(a_n)/n^(3/2) > -inf.
    """
    ln = trace.log_norms
    if np.any(~np.isfinite(ln)):
        raise NumericalFailure("decay fit refused: trace contains non-finite entries")
    n_max = trace.n_max
    tail = np.arange(max(n_max // 2, 1), n_max + 1)
    y = ln[tail] - ln[0]
    slope = np.polyfit(tail.astype(float), y, 1)[0]
    if slope >= 0:
        raise NumericalFailure("decay fit refused: tail of the trace is not decreasing")
    pos = -y > 0
    if np.count_nonzero(pos) < MIN_FIT_POINTS:
        raise NumericalFailure("decay fit refused: too few decaying tail points")
    lx = np.log(tail[pos].astype(float))
    ly = np.log(-y[pos])
    beta, logc = np.polyfit(lx, ly, 1)
    return float(beta), float(math.exp(logc))


def _require_free_term(spec, value, label):
    if spec.kind != "poly":
        raise InvalidSpec(f"{label} must be a polynomial spec")
    if abs(spec.coeffs[0] - value) > 1e-12:
        raise InvalidSpec(
            f"{label} must have free term {value:+g}, got {spec.coeffs[0]}"
        )


def perturbed_identity_kernel(a_spec, N):
    """Kernel of the identity plus convolution by the polynomial density a."""
    if a_spec.kind != "poly":
        raise InvalidSpec("perturbation density must be a polynomial spec")
    nu = Measure.from_density_coeffs(a_spec.coeffs)
    return to_kernel(Measure.point_mass(0.0, 1.0).plus(nu), N)


def irregular_regimes(a_plus, a_minus, f, n_max):
    """The two norm regimes of perturbed-identity orbits on one vector.

    a_plus (free term +1) drives ||.||_1 growth; a_minus (free term -1)
    drives the ||.||_inf decay branch, for which f should lie in the range
    of cumulative integration (pass f = V^k g with k >= 1 and smooth g).
    Returns (grow, shrink) traces.
    """
    _require_free_term(a_plus, 1.0, "a_plus")
    _require_free_term(a_minus, -1.0, "a_minus")
    grow = iterate_orbit(perturbed_identity_kernel(a_plus, f.N), f, 1, n_max)
    shrink = iterate_orbit(
        perturbed_identity_kernel(a_minus, f.N), f, math.inf, n_max
    )
    return grow, shrink
