import math

import numpy as np
import pytest

from petd import (DomainError, KernelEvaluator, Profile, SpacePoint, WaveParams, apply_N,
                  apply_N_bar, continuation_apply, greens, greens_dr_source, kernel_cone0,
                  kernel_full, kernel_modal, kernel_modal_closed, make_cone, make_spindle,
                  propagate)


def test_greens_examples():
    wp = WaveParams(2 * math.pi)
    assert greens(SpacePoint(1.0, 0.3, 0.2), SpacePoint(0.0, 0.3, 0.2), wp) == pytest.approx(-1j)
    assert greens(SpacePoint(0.0, 0.0), SpacePoint(1.0, 0.0), wp) == 0
    assert greens(SpacePoint(1.0, 0.0), SpacePoint(1.0, 0.0), wp) == 0
    a = greens(SpacePoint(2.0, 0.4, 0.3), SpacePoint(1.0, 0.1, 1.1), wp)
    b = greens(SpacePoint(2.0, 0.4, 1.3), SpacePoint(1.0, 0.1, 2.1), wp)
    assert a == pytest.approx(b, rel=1e-14)
    with pytest.raises(DomainError):
        SpacePoint(0.0, -1.0)


def test_greens_solves_parabolic_equation():
    # (d/dx + (2ik)^-1 (d2/dy2 + d2/dz2)) g = 0, Cartesian transverse coordinates
    wp = WaveParams(40.0 + 0.2j)
    src = SpacePoint(0.0, 0.0)

    def g(x, y, z):
        return greens(SpacePoint(x, math.hypot(y, z), math.atan2(z, y)), src, wp)

    h = 1e-3
    for x, y, z in [(1.0, 0.1, 0.05), (2.0, -0.2, 0.3), (0.7, 0.02, -0.1)]:
        dx = (-g(x + 2 * h, y, z) + 8 * g(x + h, y, z) - 8 * g(x - h, y, z)
              + g(x - 2 * h, y, z)) / (12 * h)
        lap = 0
        for e in ((1, 0), (0, 1)):
            f = lambda t: g(x, y + t * e[0], z + t * e[1])
            lap += (-f(2 * h) + 16 * f(h) - 30 * f(0) + 16 * f(-h) - f(-2 * h)) / (12 * h * h)
        res = dx + lap / (2j * wp.k)
        assert abs(res) <= 1e-4 * abs(dx)


def test_greens_radial_derivative():
    wp = WaveParams(30.0)
    obs = SpacePoint(2.0, 0.3, 0.4)
    h = 1e-6
    fd = (greens(obs, SpacePoint(1.0, 0.2 + h, 1.0), wp)
          - greens(obs, SpacePoint(1.0, 0.2 - h, 1.0), wp)) / (2 * h)
    assert greens_dr_source(obs, SpacePoint(1.0, 0.2, 1.0), wp) == pytest.approx(fd, rel=1e-7)


def test_boundary_operators():
    assert apply_N(1.0, 2.0, 3.0, 0.5) == pytest.approx(1.0 - 3j)
    assert apply_N_bar(1.0, 2.0, 3.0, 0.5) == pytest.approx(1.0 + 3j)


def test_kernel_full_cylinder_vanishes_on_line():
    cyl = Profile(np.array([0.3]), 0.0, 5.0, name="cylinder")
    ke = KernelEvaluator(cyl, WaveParams(50.0))
    assert kernel_full(ke, 2.0, 0.7, 1.0, 0.7) == 0
    assert kernel_full(ke, 2.0, 0.7, 1.0, 0.9) != 0


def test_kernel_full_difference_in_angle_and_order():
    ke = KernelEvaluator(make_spindle(0.1, 0.0, 4.0), WaveParams(50.0))
    a = kernel_full(ke, 3.0, 0.2, 1.5, 1.0)
    b = kernel_full(ke, 3.0, 1.2, 1.5, 2.0)
    assert a == pytest.approx(b, rel=1e-13)
    with pytest.raises(DomainError):
        kernel_full(ke, 1.0, 0.0, 2.0, 0.0)
    with pytest.raises(DomainError):
        kernel_full(ke, 5.0, 0.0, 2.0, 0.0)


def test_kernel_modal_matches_cone0_example():
    wp = WaveParams.from_eta(100.0, 0.01)
    ke = KernelEvaluator(make_cone(0.1), wp, 0)
    assert kernel_modal(ke, 2.0, 1.0) == pytest.approx(kernel_cone0(wp, 0.1, 2.0, 1.0), rel=1e-8)


@pytest.mark.parametrize("n", [0, 1, 2, 5, 9])
def test_closed_modal_kernel_matches_angular_quadrature(n):
    rng = np.random.default_rng(n)
    prof = make_spindle(0.08, 0.0, 3.0)
    ke = KernelEvaluator(prof, WaveParams.from_eta(300.0, 0.01), n)
    for _ in range(12):
        x, xs = np.sort(rng.uniform(0.05, 2.95, 2))
        ref = kernel_modal(ke, xs, x)
        got = kernel_modal_closed(ke, xs, x)
        # the reference is accurate relative to the integrand scale, about |K_0|
        scale = abs(kernel_modal(ke.with_mode(0), xs, x))
        assert abs(got - ref) <= 1e-9 * abs(ref) + 1e-10 * scale


def test_closed_modal_kernel_offsurface_and_symmetry():
    prof = make_spindle(0.08, 0.0, 3.0)
    ke = KernelEvaluator(prof, WaveParams.from_eta(300.0, 0.01), 3)
    ref = kernel_modal(ke, 2.5, 1.2, r_star=0.35)
    assert kernel_modal_closed(ke, 2.5, 1.2, r_star=0.35) == pytest.approx(ref, rel=1e-9)
    assert kernel_modal_closed(ke.with_mode(-3), 2.5, 1.2) == kernel_modal_closed(ke, 2.5, 1.2)
    assert kernel_modal(ke.with_mode(-3), 2.5, 1.2) == pytest.approx(
        kernel_modal(ke, 2.5, 1.2), rel=1e-10)


def test_modal_kernel_decays_in_n():
    wp = WaveParams.from_eta(100.0, 0.01)
    alpha, xs, x = 0.1, 2.0, 1.0
    ke = KernelEvaluator(make_cone(alpha), wp, 0)
    c = abs(wp.k) * alpha * xs * alpha * x / (xs - x)
    mags = [abs(kernel_modal(ke.with_mode(n), xs, x)) for n in range(int(c) + 2, int(c) + 12)]
    assert all(b < a for a, b in zip(mags, mags[1:]))
    assert mags[-1] < 1e-3 * mags[0]


def test_modal_kernel_vanishes_with_radius():
    prof = make_spindle(0.1, 0.0, 2.0)
    ke = KernelEvaluator(prof, WaveParams.from_eta(50.0, 0.01), 0)
    vals = [abs(kernel_modal_closed(ke, 1.0, x)) for x in (1e-3, 1e-5, 1e-7)]
    assert vals[1] < 0.1 * vals[0] and vals[2] < 0.1 * vals[1]


def test_cone0_self_similar():
    wp = WaveParams.from_eta(1000.0, 0.01)
    wp2 = WaveParams(wp.k / 9)
    y, ys = 2.0, 5.0
    a = kernel_cone0(wp, 0.05, ys / (wp.k.real * 0.0025), y / (wp.k.real * 0.0025))
    # dx scales with 1 / (k alpha^2): compare K dx, i.e. K / (k alpha^2)
    s1, s2 = wp.k.real * 0.05 ** 2, wp2.k.real * 0.15 ** 2
    b = kernel_cone0(wp2, 0.15, ys / s2, y / s2)
    assert a / s1 == pytest.approx(b / s2, rel=1e-12)
    with pytest.raises(DomainError):
        kernel_cone0(wp, 0.1, 1.0, 2.0)


def test_continuation_constant_and_gaussian_exact():
    wp = WaveParams(80.0)
    assert continuation_apply(lambda r, p: 1 + 0 * r * p, 0.0, SpacePoint(1.0, 0.3, 1.0),
                              wp) == pytest.approx(1.0, abs=1e-9)
    a = 2.0
    g0 = lambda r, p: np.exp(-a * r * r) + 0 * p
    q = 1 + 2j * a * 0.8 / wp.k
    for r in (0.0, 0.2, 0.6):
        exact = np.exp(-a * r * r / q) / q
        got = continuation_apply(g0, 0.0, SpacePoint(0.8, r, 0.4), wp)
        assert got == pytest.approx(exact, abs=1e-9)


def test_propagate_tilted_gaussian_has_angular_structure():
    wp = WaveParams(60.0)
    th = 0.1
    v = lambda r, p: np.exp(-r * r + 1j * wp.k * th * r * np.cos(p))
    out = propagate(v, 0.0, 0.5, [0.3, 0.3], [0.0, math.pi], wp)
    assert abs(out[0] - out[1]) > 1e-3
    # mirror symmetry phi -> -phi
    a, b = propagate(v, 0.0, 0.5, [0.25, 0.25], [0.7, -0.7], wp)
    assert a == pytest.approx(b, rel=1e-9)


def test_propagate_requires_downstream():
    with pytest.raises(DomainError):
        propagate(lambda r, p: 1 + 0 * r, 1.0, 1.0, [0.0], [0.0], WaveParams(10.0))
