"""Adaptive panel quadrature, angular doubling rule, and the Weyl oracle.

The analytic set here has closed forms derived by hand; beyond matching the
values, the reported error estimates must actually bound the true errors
(with bounded slack), and repeated runs must be bit-identical.
"""

import numpy as np
import pytest

from slabpdc.quadrature import (ConvergenceError, QuadratureSpec,
                                integrate_angular, integrate_radial,
                                weyl_oracle)


# ---------------------------------------------------------------------------
# Radial panels
# ---------------------------------------------------------------------------

def test_monomial():
    val, err = integrate_radial(lambda x: x, 0.0, 1.0)
    assert val == pytest.approx(0.5, rel=1e-13)
    assert abs(val - 0.5) <= 10.0 * max(err, 1e-16)


def test_full_periods_of_sine():
    spec = QuadratureSpec(rel_tol=1e-10, abs_floor=1e-12)
    val, err = integrate_radial(np.sin, 0.0, 20.0 * np.pi, spec)
    assert abs(val) <= 1e-12 + 10.0 * err


def test_inverse_sqrt_endpoint_substitution():
    # int_0^1 x/sqrt(1-x^2) dx = 1; integrable singularity at the top end
    spec = QuadratureSpec(rel_tol=1e-10, endpoint_substitution=True)
    val, err = integrate_radial(lambda x: x / np.sqrt(1.0 - x * x),
                                0.0, 1.0, spec)
    assert val == pytest.approx(1.0, rel=1e-9)
    assert abs(val - 1.0) <= 10.0 * max(err, 1e-15)


def test_oscillatory_panel_cap():
    # e^{i w x} over whole periods; the cap keeps panels under a period
    w = 200.0
    spec = QuadratureSpec(rel_tol=1e-10, abs_floor=1e-13)
    val, err = integrate_radial(lambda x: np.exp(1j * w * x),
                                0.0, 2.0 * np.pi, spec,
                                max_panel=2.0 * np.pi / w)
    assert abs(val) <= 1e-12 + 10.0 * err


def test_error_estimate_bounds_truth_on_analytic_set():
    cases = [
        (lambda x: x ** 5, 0.0, 1.0, 1.0 / 6.0),
        (np.cos, 0.0, 3.0, np.sin(3.0)),
        (lambda x: np.exp(-x) * np.sin(7.0 * x), 0.0, 5.0,
         (7.0 - np.exp(-5.0) * (np.sin(35.0) * 1.0
                                + 7.0 * np.cos(35.0))) / 50.0),
    ]
    for f, a, b, truth in cases:
        val, err = integrate_radial(f, a, b)
        assert abs(val - truth) <= 10.0 * max(err, 1e-16)


def test_determinism_bit_identical():
    f = lambda x: np.exp(1j * 37.0 * x) / (1.0 + x * x)
    a = integrate_radial(f, 0.0, 10.0)
    b = integrate_radial(f, 0.0, 10.0)
    assert a[0] == b[0] and a[1] == b[1]


def test_convergence_error_carries_partial_value():
    spec = QuadratureSpec(rel_tol=1e-15, max_subdivisions=3)
    with pytest.raises(ConvergenceError) as info:
        integrate_radial(lambda x: np.sin(300.0 * x) / (1e-3 + x),
                         0.0, 1.0, spec)
    assert info.value.value is not None
    assert np.isfinite(info.value.error)


# ---------------------------------------------------------------------------
# Angular doubling
# ---------------------------------------------------------------------------

def test_angular_cos_squared():
    val = integrate_angular(lambda p: np.cos(p) ** 2)
    assert val == pytest.approx(np.pi, rel=1e-12)


def test_angular_cos_mean_zero():
    val = integrate_angular(lambda p: np.cos(p), abs_floor=1e-13)
    assert abs(val) < 1e-12


def test_angular_cos_fourth():
    val = integrate_angular(lambda p: np.cos(p) ** 4)
    assert val == pytest.approx(0.75 * np.pi, rel=1e-12)


def test_angular_vector_valued():
    # trailing axes ride along: a stack of two harmonics at once
    def f(phis):
        return np.stack([np.cos(phis) ** 2, np.sin(phis) ** 2], axis=-1)

    val = integrate_angular(f)
    assert val == pytest.approx([np.pi, np.pi], rel=1e-12)


# ---------------------------------------------------------------------------
# Weyl oracle
# ---------------------------------------------------------------------------

def test_weyl_identity_on_axis():
    q = 50.0
    numeric, closed = weyl_oracle(1.0, 0.0, q)
    assert closed == pytest.approx(np.exp(1j * q) / (4.0 * np.pi), rel=1e-14)
    assert abs(numeric - closed) / abs(closed) < 0.01


def test_weyl_static_limit():
    z, rho = 1.0, 0.7
    r = np.hypot(z, rho)
    numeric, closed = weyl_oracle(z, rho, 1e-6)
    assert closed == pytest.approx(1.0 / (4.0 * np.pi * r), rel=1e-5)
    assert abs(numeric - closed) / abs(closed) < 0.01


def test_weyl_doubling_z_halves_magnitude():
    q = 40.0
    _, c1 = weyl_oracle(1.0, 0.0, q)
    _, c2 = weyl_oracle(2.0, 0.0, q)
    assert abs(c1) == pytest.approx(2.0 * abs(c2), rel=1e-12)
