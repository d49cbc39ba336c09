import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from truncon import operators as op
from truncon.errors import InvalidSpec
from truncon.measure import (
    Measure,
    PolyPiece,
    PowerPiece,
    atom_at_zero,
    convolve,
    derivative_measure,
    inf_support_measure,
    sup_support_measure,
    to_kernel,
    total_variation,
)

DELTA = Measure.point_mass(0.0, 1.0)
LEB = Measure.lebesgue()


# -- total variation ---------------------------------------------------------


def test_variation_point_mass():
    assert total_variation(DELTA) == pytest.approx(1.0)


def test_variation_lebesgue():
    assert total_variation(LEB) == pytest.approx(1.0)


def test_variation_fractional_half():
    # int_0^1 x^{-1/2} dx / Gamma(1/2) = 2 / sqrt(pi)
    assert total_variation(Measure.fractional(0.5)) == pytest.approx(
        2.0 / math.sqrt(math.pi), rel=1e-12
    )


def test_variation_sign_changing_density():
    # |2x - 1| integrates to 1/2 on [0, 1]
    mu = Measure.from_density_coeffs([-1.0, 2.0])
    assert total_variation(mu) == pytest.approx(0.5, rel=1e-12)


def test_variation_complex_density():
    # |1 + ix| has closed form via asinh; quadrature path must match it
    mu = Measure.from_density_coeffs([1.0, 1j])
    exact = 0.5 * (math.sqrt(2) + math.asinh(1.0))
    assert total_variation(mu) == pytest.approx(exact, rel=1e-10)


# -- derivative measure ------------------------------------------------------


def test_derivative_point_mass_at_zero_vanishes():
    d = derivative_measure(DELTA)
    assert not d.atoms and not d.pieces


def test_derivative_lebesgue_is_minus_x():
    d = derivative_measure(LEB)
    assert len(d.pieces) == 1
    np.testing.assert_allclose(d.pieces[0].coeffs, [0, -1])


def test_derivative_shifted_atom():
    d = derivative_measure(Measure.point_mass(0.4, 1.0))
    assert d.atoms == ((0.4, (-0.4 - 0j)),)


def test_derivative_fractional_piece():
    d = derivative_measure(Measure.fractional(0.5))
    piece = d.pieces[0]
    assert isinstance(piece, PowerPiece)
    assert piece.z == 1.5
    assert piece.coeff == -0.5


# -- convolution -------------------------------------------------------------


def test_point_mass_is_identity_of_convolution():
    mu = Measure(atoms=((0.25, 2.0),), pieces=(PolyPiece((1.0, 1.0)),))
    conv = convolve(DELTA, mu)
    assert conv.atoms == mu.atoms
    N = 64
    np.testing.assert_allclose(to_kernel(conv, N).k, to_kernel(mu, N).k, atol=1e-15)


def test_atom_translation():
    conv = convolve(Measure.point_mass(0.3, 1.0), Measure.point_mass(0.4, 1.0))
    assert conv.atoms == ((0.7, (1 + 0j)),)
    gone = convolve(Measure.point_mass(0.6, 1.0), Measure.point_mass(0.4, 1.0))
    assert gone.atoms == ()


def test_lebesgue_squared_is_density_x():
    conv = convolve(LEB, LEB)
    assert len(conv.pieces) == 1
    piece = conv.pieces[0]
    np.testing.assert_allclose(piece.coeffs, [0, 1], atol=1e-15)
    assert (piece.lo, piece.hi) == (0.0, 1.0)


def test_subinterval_convolution_against_quadrature():
    # independent oracle: cell-resolved numerical convolution of the densities
    mu = Measure(pieces=(PolyPiece((1.0, -0.5), 0.25, 0.75),))
    nu = Measure(pieces=(PolyPiece((0.5, 1.0), 0.125, 0.5),))
    conv = convolve(mu, nu)
    N = 512
    got = to_kernel(conv, N).k
    a = to_kernel(mu, N).k
    b = to_kernel(nu, N).k
    oracle = np.convolve(a, b)[:N]
    assert np.max(np.abs(got - oracle)) <= 2.0 / N**2
    assert inf_support_measure(conv) == pytest.approx(0.375)


def test_piecewise_convolution_randomized_oracle():
    rng = np.random.default_rng(99)
    N = 512
    align = 16
    for _ in range(25):

        def rand_piece():
            lo = int(rng.integers(0, align - 1)) / align
            hi = int(rng.integers(int(lo * align) + 1, align + 1)) / align
            deg = int(rng.integers(0, 5))
            cs = rng.uniform(-2, 2, deg + 1) + 1j * rng.uniform(-2, 2, deg + 1)
            return PolyPiece(tuple(cs), lo, hi)

        mu = Measure(pieces=(rand_piece(),))
        nu = Measure(pieces=(rand_piece(),))
        got = to_kernel(convolve(mu, nu), N).k
        oracle = np.convolve(to_kernel(mu, N).k, to_kernel(nu, N).k)[:N]
        # both sides are exact up to the cell-level product rule, O(h^2)
        assert np.max(np.abs(got - oracle)) <= 10.0 / N**2


def test_convolve_rejects_fractional_pieces():
    with pytest.raises(InvalidSpec):
        convolve(Measure.fractional(0.5), LEB)


# -- support -----------------------------------------------------------------


def test_support_endpoints():
    assert inf_support_measure(LEB) == 0.0
    assert inf_support_measure(Measure.point_mass(0.4, 1.0)) == 0.4
    assert inf_support_measure(Measure()) == 1.0
    assert sup_support_measure(Measure(atoms=((0.5, 1.0), (0.75, 1.0)))) == 0.75


# -- kernel compilation ------------------------------------------------------


def test_point_mass_kernel():
    k = to_kernel(DELTA, 8).k
    np.testing.assert_array_equal(k, np.eye(8, dtype=complex)[0])


def test_lebesgue_kernel_cells():
    np.testing.assert_allclose(to_kernel(LEB, 4).k, [0.25] * 4, rtol=0, atol=0)


def test_unit_fractional_matches_lebesgue():
    np.testing.assert_allclose(
        to_kernel(Measure.fractional(1.0), 64).k,
        to_kernel(LEB, 64).k,
        atol=1e-15,
    )


def test_kernel_rejects_unaligned_atom():
    with pytest.raises(InvalidSpec):
        to_kernel(Measure.point_mass(0.3, 1.0), 64)
    # an atom within rounding distance of 1 has no cell to land in
    with pytest.raises(InvalidSpec):
        to_kernel(Measure.point_mass(1.0 - 1e-12, 1.0), 64)


def test_atom_at_zero_values():
    assert atom_at_zero(DELTA) == 1.0
    assert atom_at_zero(LEB) == 0.0
    assert atom_at_zero(DELTA.scaled(2.0).plus(LEB)) == 2.0


def test_measure_json_parsing():
    obj = {
        "atoms": [{"t": 0.0, "w": [1, 0]}, {"t": 0.25, "w": -2}],
        "pieces": [
            {"type": "poly", "coeffs": [1, [0, 1]], "on": [0, 0.5]},
            {"type": "power", "z": [0.5, 0]},
        ],
    }
    mu = Measure.from_json(obj)
    assert atom_at_zero(mu) == 1.0
    assert len(mu.pieces) == 2
    with pytest.raises(InvalidSpec):
        Measure.from_json({"pieces": [{"type": "gaussian"}]})


# -- properties --------------------------------------------------------------

measures = st.builds(
    lambda atoms, coeffs, lo_hi: Measure(
        atoms=tuple(atoms),
        pieces=(PolyPiece(tuple(coeffs), *lo_hi),) if coeffs else (),
    ),
    st.lists(
        st.tuples(
            st.sampled_from([0.0, 0.125, 0.25, 0.5, 0.75]),
            st.complex_numbers(min_magnitude=0.1, max_magnitude=3,
                               allow_nan=False, allow_infinity=False),
        ),
        max_size=2,
    ),
    st.lists(
        st.complex_numbers(min_magnitude=0.05, max_magnitude=2,
                           allow_nan=False, allow_infinity=False),
        max_size=3,
    ),
    st.sampled_from([(0.0, 1.0), (0.25, 0.75), (0.5, 1.0)]),
)


@given(measures, measures)
@settings(max_examples=30, deadline=None)
def test_variation_submultiplicative_property(mu, nu):
    lhs = total_variation(convolve(mu, nu))
    rhs = total_variation(mu) * total_variation(nu)
    assert lhs <= rhs * (1 + 1e-9) + 1e-12


@given(measures, measures)
@settings(max_examples=30, deadline=None)
def test_titchmarsh_support_property(mu, nu):
    conv = convolve(mu, nu)
    expected = min(1.0, inf_support_measure(mu) + inf_support_measure(nu))
    assert inf_support_measure(conv) == pytest.approx(expected, abs=1e-12)


@given(measures, measures)
@settings(max_examples=20, deadline=None)
def test_kernel_linearity_property(mu, nu):
    N = 64
    lhs = to_kernel(mu.scaled(2j).plus(nu), N).k
    rhs = 2j * to_kernel(mu, N).k + to_kernel(nu, N).k
    np.testing.assert_allclose(lhs, rhs, atol=1e-13)


def test_kernel_convolution_consistency_atomic_exact():
    N = 128
    mu = Measure(atoms=((0.25, 1.0), (0.5, -2.0)))
    nu = Measure(atoms=((0.125, 3.0), (0.625, 1.5)))
    lhs = to_kernel(convolve(mu, nu), N)
    rhs = op.compose(to_kernel(mu, N), to_kernel(nu, N), method="direct")
    assert op.rel_distance(lhs, rhs) <= 1e-14


def test_kernel_convolution_consistency_density_oh():
    N = 512
    mu = Measure(atoms=((0.25, 1.0),), pieces=(PolyPiece((1.0, 2.0)),))
    nu = Measure(pieces=(PolyPiece((0.5, -1.0), 0.0, 0.5),))
    lhs = to_kernel(convolve(mu, nu), N)
    rhs = op.compose(to_kernel(mu, N), to_kernel(nu, N))
    gap = op.add(lhs, op.scale(rhs, -1.0))
    tv_gap = float(np.sum(np.abs(gap.k)) * math.exp(gap.log_scale))
    assert tv_gap <= 20.0 / N
