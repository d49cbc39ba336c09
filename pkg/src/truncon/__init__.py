"""Truncated convolution operators on [0, 1] at desk scale.

Measures on [0, 1) compile to lower-triangular Toeplitz kernels acting on
uniformly sampled functions; on top sit fractional integration of complex
order, log-domain renormalized powers, orbit-norm dynamics with growth and
decay diagnostics, and entire-function indicator estimates for measure
transforms.
"""

from .errors import InvalidSpec, NumericalFailure
from .grid import (
    FunctionSpec,
    GridFunction,
    inf_support,
    make_grid_function,
    multiply_by_argument,
    norm,
)
from .measure import (
    Measure,
    PolyPiece,
    PowerPiece,
    atom_at_zero,
    convolve,
    derivative_measure,
    inf_support_measure,
    to_kernel,
    total_variation,
)
from .operators import (
    Kernel,
    add,
    apply,
    commutator_with_M,
    compose,
    identity_kernel,
    op_exp,
    op_log_of_identity_plus,
    operator_norm_1,
    power,
    riemann_liouville,
    scale,
    volterra_kernel,
)
from .orbit import (
    GrowthSpec,
    OrbitTrace,
    decay_floor_fit,
    growth_exponent,
    growth_limit_prediction,
    irregular_regimes,
    iterate_orbit,
    operator_norm_orbit,
)
from .analytic import (
    RaySample,
    derivative_mix_support,
    fourier_log_abs,
    indicator_estimate,
    matched_convolution_pair,
    matched_pair_commutator_residual,
    matched_pair_residual,
)

__version__ = "0.1.0"
