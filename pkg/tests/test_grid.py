import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from truncon.errors import InvalidSpec
from truncon.grid import (
    FunctionSpec,
    GridFunction,
    inf_support,
    make_grid_function,
    multiply_by_argument,
    nodes,
    norm,
)


def test_constant_function_samples():
    f = make_grid_function(FunctionSpec.poly([1]), 8)
    np.testing.assert_array_equal(f.values, np.ones(8))


def test_identity_function_at_nodes():
    f = make_grid_function(FunctionSpec.poly([0, 1]), 4)
    np.testing.assert_allclose(f.values, [0.25, 0.5, 0.75, 1.0], rtol=0, atol=0)


def test_shifted_power_spec():
    # direct evaluation of sqrt(x - 0.5) * 1{x > 0.5} at the N=4 nodes
    spec = FunctionSpec.shift(FunctionSpec.power(0.5), 0.5)
    f = make_grid_function(spec, 4)
    expected = [0.0, 0.0, math.sqrt(0.25), math.sqrt(0.5)]
    np.testing.assert_allclose(f.values, expected, rtol=1e-15, atol=0)


def test_rejects_non_power_of_two():
    with pytest.raises(InvalidSpec):
        make_grid_function(FunctionSpec.poly([1]), 12)


def test_rejects_unaligned_offset():
    spec = FunctionSpec.shift(FunctionSpec.poly([1]), 0.3)
    with pytest.raises(InvalidSpec):
        make_grid_function(spec, 8)


def test_aligned_offset_accepted():
    spec = FunctionSpec.shift(FunctionSpec.poly([1]), 0.25)
    f = make_grid_function(spec, 8)
    np.testing.assert_array_equal(f.values, [0, 0, 1, 1, 1, 1, 1, 1])


def test_samples_spec_roundtrip():
    vals = np.arange(8) * (1 + 2j)
    f = make_grid_function(FunctionSpec.from_samples(vals), 8)
    np.testing.assert_array_equal(f.values, vals)
    with pytest.raises(InvalidSpec):
        make_grid_function(FunctionSpec.from_samples(vals), 16)


def test_spec_json_parsing():
    obj = {"type": "shift", "t0": 0.5, "inner": {"type": "power", "gamma": 0.5}}
    f = make_grid_function(FunctionSpec.from_json(obj), 4)
    np.testing.assert_allclose(f.values[2:], [0.5, math.sqrt(0.5)])
    with pytest.raises(InvalidSpec):
        FunctionSpec.from_json({"type": "nope"})
    with pytest.raises(InvalidSpec):
        FunctionSpec.from_json({"coeffs": [1]})


def test_norm_values():
    one = make_grid_function(FunctionSpec.poly([1]), 64)
    ident = make_grid_function(FunctionSpec.poly([0, 1]), 64)
    assert norm(one, 1) == pytest.approx(1.0)
    assert norm(ident, math.inf) == pytest.approx(1.0)
    # rectangle rule of x on the right-endpoint grid is (N+1)/(2N)
    N = 1024
    identN = make_grid_function(FunctionSpec.poly([0, 1]), N)
    assert norm(identN, 1) == pytest.approx((N + 1) / (2 * N), rel=1e-14)
    assert abs(norm(identN, 1) - 0.5) <= 1.0 / N
    assert norm(identN, 2) == pytest.approx(
        math.sqrt((N + 1) * (2 * N + 1) / (6 * N**2)), rel=1e-13
    )


def test_norm_rejects_other_p():
    f = make_grid_function(FunctionSpec.poly([1]), 8)
    with pytest.raises(InvalidSpec):
        norm(f, 3)


def test_inf_support_cases():
    N = 64
    one = make_grid_function(FunctionSpec.poly([1]), N)
    assert inf_support(one) == pytest.approx(1.0 / N)
    shifted = make_grid_function(
        FunctionSpec.shift(FunctionSpec.poly([1]), 0.25), N
    )
    assert inf_support(shifted) == pytest.approx(0.25 + 1.0 / N)
    zero = make_grid_function(FunctionSpec.poly([0]), N)
    assert inf_support(zero) == 1.0


def test_multiply_by_argument():
    N = 16
    one = make_grid_function(FunctionSpec.poly([1]), N)
    mx = multiply_by_argument(one)
    np.testing.assert_allclose(mx.values, nodes(N), rtol=0, atol=0)
    mx2 = multiply_by_argument(mx)
    np.testing.assert_allclose(mx2.values, nodes(N) ** 2, rtol=1e-15)
    zero = make_grid_function(FunctionSpec.poly([0]), N)
    assert not multiply_by_argument(zero).values.any()


def test_grid_function_validation():
    with pytest.raises(ValueError):
        GridFunction(4, np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        GridFunction(2, np.array([1.0, np.inf]))


# keep coefficients out of the denormal range: |c|^2 underflow would break
# the 2-norm for reasons unrelated to the chain inequality
coeff = st.one_of(
    st.just(0j),
    st.complex_numbers(min_magnitude=1e-6, max_magnitude=4,
                       allow_nan=False, allow_infinity=False),
)


@st.composite
def function_specs(draw):
    kind = draw(st.sampled_from(["poly", "power", "shifted_poly"]))
    if kind == "power":
        return FunctionSpec.power(draw(st.floats(-0.5, 3.0)))
    coeffs = draw(st.lists(coeff, min_size=1, max_size=6))
    spec = FunctionSpec.poly(coeffs)
    if kind == "shifted_poly":
        spec = FunctionSpec.shift(spec, draw(st.sampled_from([0.25, 0.5])))
    return spec


@given(function_specs(), st.sampled_from([16, 64, 256]))
@settings(max_examples=40, deadline=None)
def test_holder_chain_property(spec, N):
    f = make_grid_function(spec, N)
    peak = norm(f, math.inf)
    assert norm(f, 1) <= norm(f, 2) + 1e-12 * peak
    assert norm(f, 2) <= peak + 1e-12 * peak


@given(
    function_specs(),
    st.complex_numbers(min_magnitude=0.01, max_magnitude=100,
                       allow_nan=False, allow_infinity=False),
)
@settings(max_examples=40, deadline=None)
def test_norm_scaling_property(spec, c):
    f = make_grid_function(spec, 64)
    for p in (1, 2, math.inf):
        assert norm(f.scaled(c), p) == pytest.approx(abs(c) * norm(f, p), rel=1e-12, abs=1e-300)


@given(function_specs())
@settings(max_examples=40, deadline=None)
def test_refinement_agreement_property(spec):
    coarse = make_grid_function(spec, 64)
    fine = make_grid_function(spec, 128)
    np.testing.assert_array_equal(coarse.values, fine.values[1::2])


@given(function_specs())
@settings(max_examples=40, deadline=None)
def test_argument_multiplication_keeps_exact_support(spec):
    f = make_grid_function(spec, 64)
    if not f.values.any():
        return
    assert inf_support(multiply_by_argument(f), tol=0.0) == inf_support(f, tol=0.0)
