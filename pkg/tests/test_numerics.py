import math

import numpy as np
import pytest
from scipy import special

from oracles import D32_AT_ZERO, J0_1, J1_1, Y0_1
from petd import (DomainError, QuadratureSpec, SingularityError, bessel_j, bessel_j_deriv,
                  bessel_y, bessel_y_deriv, damped_real_axis, hankel1, hankel1_deriv,
                  oscillatory_integral, parabolic_cylinder_D_neg32)
from petd import _bessel_nb
from petd.numerics import adaptive_quad, ray_integral


def test_table_values():
    assert bessel_j(0, 1.0) == pytest.approx(J0_1, rel=1e-14)
    assert bessel_j(1, 1.0) == pytest.approx(J1_1, rel=1e-14)
    assert bessel_y(0, 1.0) == pytest.approx(Y0_1, rel=1e-13)
    assert hankel1(0, 1.0) == pytest.approx(J0_1 + 1j * Y0_1, rel=1e-13)


@pytest.mark.parametrize("n", [0, 1, 3, 7])
@pytest.mark.parametrize("z", [0.3, 2.5 + 0.4j, 17.0 + 1e-2j, 40.0 + 3j])
def test_wronskian(n, z):
    w = bessel_j(n, z) * bessel_y_deriv(n, z) - bessel_j_deriv(n, z) * bessel_y(n, z)
    assert w == pytest.approx(2 / (math.pi * z), rel=1e-11)


@pytest.mark.parametrize("z", [0.7, 5.0 + 0.5j, 30.0 + 0.1j])
def test_recurrence_and_derivatives(z):
    for n in range(1, 6):
        lhs = bessel_j(n - 1, z) + bessel_j(n + 1, z)
        assert lhs == pytest.approx(2 * n / z * bessel_j(n, z), rel=1e-10, abs=1e-14)
    h = 1e-5
    for n in (0, 2):
        fd = (hankel1(n, z + h) - hankel1(n, z - h)) / (2 * h)
        assert hankel1_deriv(n, z) == pytest.approx(fd, rel=1e-8)


def test_argument_checks():
    with pytest.raises(SingularityError):
        bessel_y(0, 0.0)
    with pytest.raises(SingularityError):
        hankel1(1, 0.0)
    with pytest.raises(DomainError):
        hankel1(0, 1.0 - 1.0j)
    with pytest.raises(DomainError):
        bessel_j(0, 2e4)
    with pytest.raises(DomainError):
        bessel_j(-1, 1.0)


def test_compiled_hankel_matches_scipy():
    rng = np.random.default_rng(1)
    z = rng.uniform(0.01, 300, 300) * np.exp(1j * rng.uniform(0, 0.05, 300))
    h1 = np.empty(14, complex)
    h2 = np.empty(14, complex)
    for v in z:
        _bessel_nb.hankel_scaled(12, v, h1, h2)
        for n in (0, 1, 4, 12):
            r1, r2 = special.hankel1e(n, v), special.hankel2e(n, v)
            assert abs(h1[n] - r1) <= 5e-11 * abs(r1)
            assert abs(h2[n] - r2) <= 5e-11 * abs(r2)
        for n in (0, 3):
            assert abs(_bessel_nb.jv_scalar(n, v) - special.jv(n, v)) <= 1e-11 * max(
                abs(special.jv(n, v)), 1e-2)


def test_adaptive_quad_and_linearity():
    f = lambda t: np.exp(1j * 3 * t) * np.cos(t)
    g = lambda t: t ** 2 + 1j
    exact_g = 8.0 / 3 + 2j
    rg = adaptive_quad(g, 0.0, 2.0, rtol=1e-13)
    assert rg.value == pytest.approx(exact_g, rel=1e-13)
    rf = adaptive_quad(f, 0.0, 2.0, rtol=1e-13)
    a, b = 2.0 - 1.5j, 0.25
    rl = adaptive_quad(lambda t: a * f(t) + b * g(t), 0.0, 2.0, rtol=1e-13)
    assert rl.value == pytest.approx(a * rf.value + b * rg.value, rel=1e-12)


def test_oscillatory_integral_contour_and_damped_agree():
    # int_0^inf exp(i t) exp(-t/5) dt = 1 / (1/5 - i)
    f = lambda t: np.exp(1j * t - t / 5)
    exact = 1 / (0.2 - 1j)
    rot = oscillatory_integral(f, QuadratureSpec(1e-10, contour_rotation_angle=math.pi / 4))
    assert rot.value == pytest.approx(exact, rel=1e-9)
    damp = damped_real_axis(f, QuadratureSpec(1e-8, contour_rotation_angle=0.0))
    assert damp.value == pytest.approx(exact, rel=1e-6)


def test_fresnel_integral_by_rotation():
    # int_0^inf exp(i t^2) dt = sqrt(pi)/2 e^{i pi/4}
    r = ray_integral(lambda z: np.exp(1j * z * z), np.exp(1j * math.pi / 4), rtol=1e-12)
    assert r.value == pytest.approx(math.sqrt(math.pi) / 2 * np.exp(1j * math.pi / 4), rel=1e-11)


def test_d32_at_zero_is_frozen_value():
    assert parabolic_cylinder_D_neg32(0.0) == pytest.approx(D32_AT_ZERO, rel=1e-11)


@pytest.mark.parametrize("z", [-2.0, -0.5, 0.8, 3.0])
def test_d32_matches_whittaker_up_to_gaussian(z):
    # integral normalisation = exp(-z^2/4) * Whittaker D_{-3/2}
    ref = math.exp(-z * z / 4) * special.pbdv(-1.5, z)[0]
    assert parabolic_cylinder_D_neg32(z) == pytest.approx(ref, rel=1e-10)


def test_d32_complex_argument_smooth():
    zs = 1.5 * np.exp(0.75j * math.pi) * np.linspace(-2, 2, 9)
    vals = np.array([parabolic_cylinder_D_neg32(z) for z in zs])
    assert np.all(np.isfinite(vals))
    h = 1e-5
    z0 = 0.3 + 0.4j
    d1 = (parabolic_cylinder_D_neg32(z0 + h) - parabolic_cylinder_D_neg32(z0 - h)) / (2 * h)
    d2 = (parabolic_cylinder_D_neg32(z0 + 1j * h) - parabolic_cylinder_D_neg32(z0 - 1j * h)) / (2j * h)
    # analyticity: Cauchy-Riemann
    assert d1 == pytest.approx(d2, rel=1e-6)
