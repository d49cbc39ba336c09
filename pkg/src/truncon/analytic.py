"""Entire-function diagnostics for measure transforms, plus the constructive
identity checks that pair convolution kernels with the multiplication
operator.

The transform of a measure on [0, 1) is entire of exponential type; its
indicator function along a ray is pinned by the support endpoints.  The
windowed-max estimator below realizes the limsup over a log-spaced radius
window, which is the cheapest estimator consistent with completely regular
growth on rays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpec
from .grid import inf_support, multiply_by_argument
from .measure import (
    Measure,
    atom_at_zero,
    derivative_measure,
    inf_support_measure,
    sup_support_measure,
    to_kernel,
)
from .operators import (
    Kernel,
    add,
    apply,
    compose,
    riemann_liouville,
    scale,
    volterra_kernel,
)

# Cells used when a density's transform is evaluated from its compiled kernel.
TRANSFORM_CELLS = 8192

# Kernel-support scans sit just above the FFT noise floor (~1e-16 relative)
# so that densities vanishing to moderate order at 0 are still detected.
KERNEL_SUPPORT_TOL = 1e-12

INDICATOR_RADII = 64


@dataclass(frozen=True)
class RaySample:
    """Samples of ln|transform| along the ray r -> r e^{i theta}."""

    theta: float
    radii: np.ndarray
    log_abs: np.ndarray

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=np.float64)
        vals = np.asarray(self.log_abs, dtype=np.float64)
        if radii.ndim != 1 or radii.shape != vals.shape:
            raise InvalidSpec("radii and log_abs must be matching 1-D sequences")
        if np.any(np.diff(radii) <= 0) or np.any(radii <= 0):
            raise InvalidSpec("radii must be positive and strictly increasing")
        if not np.all(np.isfinite(vals)):
            raise InvalidSpec("log_abs entries must be finite")
        radii.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "log_abs", vals)


def fourier_log_abs(mu, z, n_cells=TRANSFORM_CELLS):
    """ln |integral of e^{-itz} d mu(t)|, stable up to |Im z| ~ 500.

    Atoms are summed exactly; density pieces contribute through their
    compiled kernel cells at the cell left edges.  Accumulation happens in
    log-sum-exp form: terms are scaled by the largest log magnitude before
    summation, so huge exponentials on the lower half-plane rays stay
    representable.
    """
    z = complex(z)
    y = z.imag
    locations = []
    weights = []
    for t, w in mu.atoms:
        locations.append(t)
        weights.append(w)
    if mu.pieces:
        cells = to_kernel(Measure(pieces=mu.pieces), n_cells).k
        locations.extend(np.arange(n_cells) / n_cells)
        weights.extend(cells)
    if not locations:
        return -math.inf
    locations = np.asarray(locations, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.complex128)
    mags = np.abs(weights)
    live = mags > 0
    if not np.any(live):
        return -math.inf
    log_terms = np.full(len(weights), -np.inf)
    log_terms[live] = np.log(mags[live]) + locations[live] * y
    peak = float(np.max(log_terms))
    phases = np.zeros(len(weights), dtype=np.complex128)
    phases[live] = weights[live] / mags[live]
    total = np.sum(
        np.exp(log_terms - peak) * phases * np.exp(-1j * locations * z.real)
    )
    mag = abs(total)
    if mag == 0.0:
        return -math.inf
    return peak + math.log(mag)


def ray_sample(mu, theta, radii, n_cells=TRANSFORM_CELLS):
    vals = [fourier_log_abs(mu, r * complex(math.cos(theta), math.sin(theta)), n_cells)
            for r in radii]
    return RaySample(theta=float(theta), radii=np.asarray(radii), log_abs=np.asarray(vals))


def indicator_estimate(mu, theta, R, n_radii=INDICATOR_RADII, n_cells=TRANSFORM_CELLS):
    """Windowed-max estimate of the ray indicator lim sup ln|mu^|(re^{i theta})/r.

    Takes the max of ln|transform|/r over n_radii log-spaced radii in
    [R/2, R]; use theta != 0 and R >= 50 for meaningful answers.
    """
    radii = np.geomspace(R / 2.0, R, n_radii)
    sample = ray_sample(mu, theta, radii, n_cells)
    return float(np.max(sample.log_abs / sample.radii))


def expected_indicator(mu, theta):
    """Support-endpoint prediction: b sin(theta) above the axis, a sin(theta) below."""
    if 0.0 <= theta <= math.pi:
        return sup_support_measure(mu) * math.sin(theta)
    return inf_support_measure(mu) * math.sin(theta)


def kernel_inf_support(T, tol=KERNEL_SUPPORT_TOL):
    """Left edge m/N of the first kernel cell above tol * max|k|; 1.0 if none."""
    mags = np.abs(T.k)
    peak = mags.max()
    if peak == 0.0:
        return 1.0
    idx = np.nonzero(mags > tol * peak)[0]
    return float(idx[0] / T.N) if len(idx) else 1.0


def derivative_mix_support(mus, cs, N, tol=KERNEL_SUPPORT_TOL):
    """Support onset of sum_j c_j (mu_1 * ... * mu_j' * ... * mu_n) as kernels.

    Preconditions: every measure has support infimum 0, the weights are
    positive, and at least one measure carries no atom at the origin.  Under
    them the mixed-derivative combination cannot vanish near 0, so the
    returned onset must sit within a few cells of the origin.
    """
    if len(mus) == 0 or len(mus) != len(cs):
        raise InvalidSpec("need matching, non-empty measure and weight lists")
    for c in cs:
        if not c > 0:
            raise InvalidSpec("weights must be positive")
    for m in mus:
        if inf_support_measure(m) != 0.0:
            raise InvalidSpec("every measure must have support infimum 0")
    if all(atom_at_zero(m) != 0 for m in mus):
        raise InvalidSpec("at least one measure must have no atom at the origin")
    base = [to_kernel(m, N) for m in mus]
    deriv = [to_kernel(derivative_measure(m), N) for m in mus]
    total = None
    for j in range(len(mus)):
        term = deriv[j]
        for i in range(len(mus)):
            if i != j:
                term = compose(term, base[i])
        term = scale(term, cs[j])
        total = term if total is None else add(total, term)
    return kernel_inf_support(total, tol)


def matched_convolution_pair(f, g):
    """Density kernels (C, B) with C f = B g for f, g supported from 0.

    C carries the density g and B the density f (cell mass h * sample), so
    both applications compute the same truncated convolution of the two
    sample sequences.
    """
    if f.N != g.N:
        raise ValueError("grid sizes differ")
    h = 1.0 / f.N
    for name, fn in (("f", f), ("g", g)):
        if inf_support(fn) > 2.0 * h + 1e-15:
            raise InvalidSpec(f"{name} must be supported from the origin (within 2h)")
    C = Kernel(f.N, g.values * h)
    B = Kernel(f.N, f.values * h)
    return C, B


def matched_pair_residual(f, g):
    """sup-norm residual ||C f - B g||_inf of the matched pair."""
    C, B = matched_convolution_pair(f, g)
    lhs = apply(C, f)
    rhs = apply(B, g)
    return float(np.max(np.abs(lhs.values - rhs.values)))


def matched_pair_commutator_residual(f, z):
    """Relative residual of (CM - B) g = (z+1) C V g with g the (z+1)-fractional
    iterate of f, C the density-f kernel and B the density-(Mf) kernel.

    Both sides reuse the same fractional discretization of g, so the
    residual isolates the commutator's quadrature error.  Requires
    Re z > -1 and f supported from the origin.
    """
    z = complex(z)
    if z.real <= -1.0:
        raise InvalidSpec(f"identity requires Re z > -1, got {z}")
    N = f.N
    h = 1.0 / N
    if inf_support(f) > 2.0 * h + 1e-15:
        raise InvalidSpec("f must be supported from the origin (within 2h)")
    mf = multiply_by_argument(f)
    C = Kernel(N, f.values * h)
    B = Kernel(N, mf.values * h)
    g = apply(riemann_liouville(z + 1.0, N), f)
    lhs = apply(C, multiply_by_argument(g)).values - apply(B, g).values
    rhs = (z + 1.0) * apply(C, apply(volterra_kernel(N), g)).values
    ref = float(np.max(np.abs(rhs)))
    if ref == 0.0:
        return float(np.max(np.abs(lhs)))
    return float(np.max(np.abs(lhs - rhs)) / ref)
