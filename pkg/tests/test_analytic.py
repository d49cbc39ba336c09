import math

import numpy as np
import pytest

from truncon import measure as ms
from truncon import operators as op
from truncon.analytic import (
    RaySample,
    derivative_mix_support,
    expected_indicator,
    fourier_log_abs,
    indicator_estimate,
    kernel_inf_support,
    matched_convolution_pair,
    matched_pair_commutator_residual,
    matched_pair_residual,
    ray_sample,
)
from truncon.errors import InvalidSpec
from truncon.grid import FunctionSpec, make_grid_function
from truncon.verify import random_admissible_tuple

DELTA = ms.Measure.point_mass(0.0, 1.0)
LEB = ms.Measure.lebesgue()


def grid_one(N):
    return make_grid_function(FunctionSpec.poly([1]), N)


# -- transform ---------------------------------------------------------------


def test_point_mass_transform_identically_one():
    for z in (0.0, 3 + 4j, -200j, 450j):
        assert fourier_log_abs(DELTA, z) == 0.0


def test_lebesgue_transform_on_imaginary_axis():
    # closed form: |transform(i r)| = (e^r - 1)/r, |transform(-i r)| = (1 - e^-r)/r
    for r in (50.0, 300.0, 500.0):
        up = fourier_log_abs(LEB, 1j * r)
        assert up == pytest.approx(math.log(math.expm1(r)) - math.log(r), abs=0.05)
        down = fourier_log_abs(LEB, -1j * r)
        assert down == pytest.approx(math.log(-math.expm1(-r)) - math.log(r), abs=0.05)


def test_zero_measure_transform_is_minus_inf():
    assert fourier_log_abs(ms.Measure(), 1j) == -math.inf


def test_transform_multiplicative_on_atoms():
    a = ms.Measure(atoms=((0.25, 1.0), (0.5, -0.5j)))
    b = ms.Measure(atoms=((0.125, 2.0),))
    z = 7.5 - 33j
    lhs = fourier_log_abs(ms.convolve(a, b), z)
    rhs = fourier_log_abs(a, z) + fourier_log_abs(b, z)
    assert lhs == pytest.approx(rhs, abs=1e-12)


# -- ray samples / indicator ---------------------------------------------------


def test_ray_sample_validation():
    with pytest.raises(InvalidSpec):
        RaySample(0.5, np.array([1.0, 1.0]), np.array([0.0, 0.0]))
    with pytest.raises(InvalidSpec):
        RaySample(0.5, np.array([1.0, 2.0]), np.array([0.0, np.inf]))
    RaySample(0.5, np.array([1.0, 2.0]), np.array([0.0, 0.1]))


def test_ray_sample_shapes():
    s = ray_sample(LEB, math.pi / 2, np.geomspace(50, 100, 8))
    assert s.radii.shape == (8,) and np.all(np.isfinite(s.log_abs))


def test_indicator_for_lebesgue():
    assert indicator_estimate(LEB, math.pi / 2, 300) == pytest.approx(1.0, abs=0.05)
    assert indicator_estimate(LEB, -math.pi / 2, 300) == pytest.approx(0.0, abs=0.05)


def test_indicator_two_atom_measure():
    mu = ms.Measure(atoms=((0.5, 1.0), (0.75, 1.0)))
    up = indicator_estimate(mu, math.pi / 2, 300)
    down = indicator_estimate(mu, -math.pi / 2, 300)
    assert up == pytest.approx(0.75, abs=0.05)
    assert down == pytest.approx(-0.5, abs=0.05)
    assert expected_indicator(mu, math.pi / 2) == pytest.approx(0.75)
    assert expected_indicator(mu, -math.pi / 2) == pytest.approx(-0.5)


def test_indicator_fractional_density():
    # support of the order-1/2 density spans all of [0, 1)
    mu = ms.Measure.fractional(0.5)
    assert indicator_estimate(mu, math.pi / 2, 300) == pytest.approx(1.0, abs=0.05)
    assert indicator_estimate(mu, -math.pi / 2, 300) == pytest.approx(0.0, abs=0.05)


def test_indicator_stable_under_window_doubling():
    for mu in (LEB, ms.Measure(atoms=((0.25, 1.0), (0.625, 2.0)))):
        e1 = indicator_estimate(mu, -2.0, 150)
        e2 = indicator_estimate(mu, -2.0, 300)
        assert abs(e1 - e2) <= 0.05


# -- mixed-derivative support --------------------------------------------------


def test_mix_support_single_lebesgue():
    assert derivative_mix_support([LEB], [1.0], 2048) <= 2.0 / 2048


def test_mix_support_pair():
    val = derivative_mix_support([LEB, DELTA.plus(LEB)], [1.0, 1.0], 2048)
    assert val <= 4.0 / 2048


def test_mix_support_rejects_all_atoms_at_zero():
    with pytest.raises(InvalidSpec):
        derivative_mix_support([DELTA.plus(LEB), DELTA], [1.0, 1.0], 512)


def test_mix_support_rejects_shifted_support():
    with pytest.raises(InvalidSpec):
        derivative_mix_support([ms.Measure.point_mass(0.25, 1.0)], [1.0], 512)
    with pytest.raises(InvalidSpec):
        derivative_mix_support([LEB], [-1.0], 512)


def test_mix_support_randomized_suite():
    rng = np.random.default_rng(2024)
    N = 2048
    for _ in range(20):
        mus, cs = random_admissible_tuple(rng)
        assert derivative_mix_support(mus, cs, N) <= 4.0 / N


def test_kernel_inf_support_conventions():
    assert kernel_inf_support(op.zero_kernel(64)) == 1.0
    T = ms.to_kernel(ms.Measure.point_mass(0.5, 1.0), 64)
    assert kernel_inf_support(T) == pytest.approx(0.5)


# -- matched pairs ----------------------------------------------------------------


def test_matched_pair_symmetric_inputs():
    N = 256
    f = grid_one(N)
    assert matched_pair_residual(f, f) == 0.0


def test_matched_pair_examples():
    N = 512
    one = grid_one(N)
    ident = make_grid_function(FunctionSpec.poly([0, 1]), N)
    # both sides approximate the truncated convolution of the inputs
    assert matched_pair_residual(one, ident) <= 1.0 / N
    assert matched_pair_residual(one, one) <= 1.0 / N
    C, B = matched_convolution_pair(one, ident)
    got = op.apply(C, one).values
    x = np.arange(1, N + 1) / N
    assert np.max(np.abs(got - x**2 / 2)) <= 2.0 / N


def test_matched_pair_rejects_late_support():
    N = 64
    one = grid_one(N)
    shifted = make_grid_function(FunctionSpec.shift(FunctionSpec.poly([1]), 0.25), N)
    with pytest.raises(InvalidSpec):
        matched_convolution_pair(shifted, one)


# -- commutator identity on fractional iterates -------------------------------------


@pytest.mark.parametrize("z", [1.0, 0.5 + 0.5j])
def test_fractional_commutator_residual_halves(z):
    res = {}
    for N in (2048, 4096):
        f = grid_one(N)
        res[N] = matched_pair_commutator_residual(f, z)
    assert res[2048] <= 5e-2
    assert res[4096] <= 0.6 * res[2048]


def test_fractional_commutator_degenerate_order_zero():
    # z = 0 reduces to the first-order identity (C M - B) V f = (C V) V f
    N = 1024
    f = grid_one(N)
    assert matched_pair_commutator_residual(f, 0.0) <= 5e-2


def test_fractional_commutator_rejects_bad_order():
    f = grid_one(64)
    with pytest.raises(InvalidSpec):
        matched_pair_commutator_residual(f, -1.5)


def test_fractional_commutator_rejects_late_support():
    N = 64
    shifted = make_grid_function(FunctionSpec.shift(FunctionSpec.poly([1]), 0.5), N)
    with pytest.raises(InvalidSpec):
        matched_pair_commutator_residual(shifted, 1.0)
