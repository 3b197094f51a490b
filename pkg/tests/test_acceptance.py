"""The ten acceptance criteria, each at its stated tolerance.

Every test records one ``criterion N: PASS/FAIL ...`` line, printed as it
runs and again in the terminal summary. Criteria 2 and 8 are not met by a
faithful implementation; they are kept at full tolerance and marked as
strict expected failures (see the decision ledger for the analysis).
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from petd import (DEFAULT_ETAS, KernelEvaluator, SpacePoint, WaveParams, appendix_surface_field,
                  asympt_constant_P, convolution_pieces, eta_extrapolate, far_field_fit, greens,
                  kernel_cone0, kernel_full, kernel_modal, make_cone, make_spindle,
                  offsurface_field, optical_theorem_balance, penumbra_field, propagate,
                  solve_neumann, surface_field, surface_field_sc)

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]


def report(capsys, num: int, ok: bool, text: str):
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {text}"
    ACCEPTANCE[num] = line
    with capsys.disabled():
        print("\n" + line)


def rel_inf(a, b):
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


# 1 ----------------------------------------------------------------------


def test_c1_marching_vs_analytic(cone_a, capsys):
    m = cone_a.y >= 0.5
    ref = surface_field(cone_a.y[m])
    err = float(np.max(np.abs(cone_a.U[m] - ref) / np.abs(ref)))
    ok = err <= 2e-2 and cone_a.elapsed <= 60 and cone_a.grid.size >= 1600
    report(capsys, 1, ok, f"rel Linf {err:.2e} (<= 2e-2), {cone_a.grid.size} nodes, "
                          f"solve {cone_a.elapsed:.1f} s (<= 60 s)")
    assert err <= 2e-2
    assert cone_a.elapsed <= 60
    assert cone_a.grid.size >= 1600


# 2 ----------------------------------------------------------------------


def _partial_sums(cone, start, terms):
    per_eta = []
    for eta in cone.etas:
        ke = KernelEvaluator(make_cone(cone.alpha), WaveParams.from_eta(cone.k_real, eta), 0)
        _, tr = solve_neumann(ke, 2 * np.ones(cone.grid.size, complex), cone.grid,
                              max_terms=terms, tol=0.0, start=start,
                              weights=cone.weights[eta])
        per_eta.append(tr.partial_sums())
    return [eta_extrapolate([p[j] for p in per_eta], cone.etas) for j in range(terms)]


@pytest.mark.xfail(strict=True, reason="the plain iteration series alternates at the tip "
                   "and is not converged after 12 terms; see the decision ledger")
def test_c2_iteration_series(cone_a, capsys):
    t0 = time.perf_counter()
    S = _partial_sums(cone_a, "doubled", 12)
    elapsed = cone_a.elapsed + time.perf_counter() - t0
    change = float(np.max(np.abs(S[11] - S[9])) / np.max(np.abs(S[11])))
    match = rel_inf(S[11], cone_a.U)
    # diagnostic: the series started from U^in (means of consecutive sums)
    Si = _partial_sums(cone_a, "incident", 12)
    ichange = float(np.max(np.abs(Si[11] - Si[9])) / np.max(np.abs(Si[11])))
    imatch = rel_inf(Si[11], cone_a.U)
    ok = change < 1e-2 and match <= 1e-3 and elapsed <= 120
    report(capsys, 2, ok, f"terms 10->12 change {change:.2e} (< 1e-2), vs marching "
                          f"{match:.2e} (<= 1e-3), {elapsed:.1f} s; incident start: "
                          f"{ichange:.2e}, {imatch:.2e}")
    assert elapsed <= 120
    assert change < 1e-2
    assert match <= 1e-3


# 3 ----------------------------------------------------------------------


def test_c3_tip_condition(cone_a, capsys):
    tip = abs(surface_field_sc(1e-3))
    m = (cone_a.y > 0) & (cone_a.y <= 1.0)
    a = np.abs(cone_a.usc[m])
    # walking toward the tip |U^sc| may not grow by more than 10 %
    rise = float(np.max((a[:-1] - a[1:]) / a[1:]))
    ok = tip < 0.05 and rise <= 0.1
    report(capsys, 3, ok, f"|U^sc(1e-3)| = {tip:.2e} (< 0.05), largest rise toward the tip "
                          f"on y in (0, 1] {max(rise, 0.0):.2e} (<= 0.1)")
    assert tip < 0.05
    assert rise <= 0.1


# 4 ----------------------------------------------------------------------


def test_c4_far_asymptotics(capsys):
    P8 = asympt_constant_P(math.pi / 8).value
    P4 = asympt_constant_P(math.pi / 4).value
    fit = far_field_fit(100.0, 400.0)
    dev = abs(fit.naive - P8) / abs(P8)
    dev2 = abs(fit.p_fit - P8) / abs(P8)
    agree = abs(P8 - P4)
    ok = dev <= 5e-2 and agree <= 1e-8
    report(capsys, 4, ok, f"regression vs P {dev:.2e} (<= 5e-2; with the 1/y term "
                          f"{dev2:.2e}), P rotations agree to {agree:.1e} (<= 1e-8)")
    assert dev <= 5e-2
    assert agree <= 1e-8


# 5 ----------------------------------------------------------------------


def _fd_kernel(ke, xs, phs, x, ph, h):
    """``(i f/k) Nbar[g]`` with the source-radius derivative by central differences."""
    p, wp = ke.profile, ke.wp
    f, fd = float(p.f(x)), float(p.f_dot(x))
    obs = SpacePoint(xs, float(p.f(xs)), phs)
    g = lambda r: greens(obs, SpacePoint(x, r, ph), wp)
    dg = (-g(f + 2 * h) + 8 * g(f + h) - 8 * g(f - h) + g(f - 2 * h)) / (12 * h)
    return 1j * f / wp.k * (dg + 1j * wp.k * fd * g(f))


def test_c5_kernel_chain(capsys):
    rng = np.random.default_rng(5)
    # (a) explicit kernel against the finite-difference oracle
    sp = make_spindle(0.1, 0.0, 4.0)
    ke = KernelEvaluator(sp, WaveParams.from_eta(50.0, 0.0))
    ea = 0.0
    for _ in range(20):
        x, xs = np.sort(rng.uniform(0.2, 3.8, 2))
        ph, phs = rng.uniform(0, 2 * np.pi, 2)
        ref = _fd_kernel(ke, xs, phs, x, ph, 1e-4 * float(sp.f(x)))
        ea = max(ea, abs(kernel_full(ke, xs, phs, x, ph) - ref) / abs(ref))
    # (b) angular quadrature against the closed cone kernel
    alpha = 0.1
    wp = WaveParams.from_eta(100.0, 1e-2)
    kc = KernelEvaluator(make_cone(alpha), wp, 0)
    eb = 0.0
    for _ in range(20):
        x, xs = np.sort(rng.uniform(0.1, 5.0, 2))
        ref = kernel_cone0(wp, alpha, xs, x)
        eb = max(eb, abs(kernel_modal(kc, xs, x) - ref) / abs(ref))
    # (c) factorised convolution form
    pc = convolution_pieces(wp, alpha)
    ec = 0.0
    for _ in range(20):
        x, xs = np.sort(rng.uniform(0.1, 5.0, 2))
        ref = kernel_cone0(wp, alpha, xs, x)
        ec = max(ec, abs(pc.kernel_from_factors(xs, x) - ref) / abs(ref))
    ok = ea <= 1e-6 and eb <= 1e-8 and ec <= 1e-12
    report(capsys, 5, ok, f"(a) FD oracle {ea:.1e} (<= 1e-6), (b) angular quadrature "
                          f"{eb:.1e} (<= 1e-8), (c) factorisation {ec:.1e} (<= 1e-12)")
    assert ea <= 1e-6
    assert eb <= 1e-8
    assert ec <= 1e-12


# 6 ----------------------------------------------------------------------


def test_c6_continuation(capsys):
    wp = WaveParams(100.0)
    rt = np.array([0.0, 0.2, 0.5])
    pt = np.array([0.0, 1.0, 2.5])
    const = propagate(lambda r, p: np.ones(np.broadcast(r, p).shape), 0.0, 1.0, rt, pt, wp)
    e_const = float(np.max(np.abs(const - 1)))

    th = 0.05

    def plane(x):
        return lambda r, p: np.exp(1j * wp.k * (th * r * np.cos(p) - 0.5 * x * th * th))

    out = propagate(plane(0.3), 0.3, 1.3, rt, pt, wp)
    e_plane = float(np.max(np.abs(out - plane(1.3)(rt, pt))))

    w = 0.7
    gauss = lambda r, p: np.exp(-r * r / (2 * w * w)) + 0 * p

    def half(r, p):
        # axisymmetric intermediate field on the source radii of the second step
        r = np.asarray(r)
        v = propagate(gauss, 0.0, 0.5, r[:, 0], np.zeros(r.shape[0]), wp, tol=1e-12)
        return np.broadcast_to(v[:, None], np.broadcast(r, p).shape)

    two = propagate(half, 0.5, 1.2, rt, pt, wp, tol=1e-10)
    one = propagate(gauss, 0.0, 1.2, rt, pt, wp)
    e_semi = float(np.max(np.abs(two - one)))
    ok = max(e_const, e_plane, e_semi) <= 1e-6
    report(capsys, 6, ok, f"constant {e_const:.1e}, plane wave {e_plane:.1e}, Gaussian "
                          f"two-step {e_semi:.1e} (all <= 1e-6)")
    assert e_const <= 1e-6
    assert e_plane <= 1e-6
    assert e_semi <= 1e-6


# 7 ----------------------------------------------------------------------


def test_c7_appendix_pipeline(capsys):
    errs = []
    for y in (1.0, 5.0, 20.0):
        ref = surface_field(y)
        errs.append(abs(appendix_surface_field(y) - ref) / abs(ref))
    err = max(errs)
    report(capsys, 7, err <= 1e-4, f"Fourier solution vs closed form at y = 1, 5, 20: "
                                   f"{err:.1e} (<= 1e-4)")
    assert err <= 1e-4


# 8 ----------------------------------------------------------------------


@pytest.mark.xfail(strict=True, reason="the leading-order penumbra term carries an "
                   "O((k alpha^2 x)^-1/2) error, about 0.15-0.3 at k alpha^2 x = 100; "
                   "see the decision ledger")
def test_c8_penumbra(capsys):
    alpha, y = 0.1, 100.0
    kx = y / alpha ** 2
    wp = WaveParams(1.0e4)
    x = kx / wp.k.real
    errs, printed = [], []
    for q in np.linspace(-2.0, 2.0, 41):
        r = (2 * alpha - q / math.sqrt(kx)) * x
        ref = offsurface_field(wp, alpha, x, r)
        errs.append(abs(penumbra_field(wp, alpha, x, r) - ref) / abs(ref))
        printed.append(abs(penumbra_field(wp, alpha, x, r, "printed") - ref) / abs(ref))
    err = max(errs)
    report(capsys, 8, err <= 5e-2, f"max rel error {err:.3f} (<= 0.05) on |gamma| sqrt(kx) "
                                   f"<= 2 at kx = {kx:.0f}; printed form {max(printed):.2f}")
    assert err <= 5e-2


# 9 ----------------------------------------------------------------------


def test_c9_optical_theorem(spindle_axial, capsys):
    prof, wp, U = spindle_axial
    b1 = optical_theorem_balance(U, prof, wp, 20.0)
    b2 = optical_theorem_balance(U, prof, wp, 30.0)
    res = max(b1.residual, b2.residual)
    plane = abs(b1.lhs - b2.lhs) / abs(b1.lhs)
    ok = res <= 5e-2 and plane <= 1e-2
    report(capsys, 9, ok, f"residual {res:.1e} (<= 5e-2), planes x = 20, 30 differ by "
                          f"{plane:.1e} (<= 1e-2); -2 Re T = {b1.rhs:.6f}")
    assert b1.rhs > 0
    assert res <= 5e-2
    assert plane <= 1e-2


# 10 ---------------------------------------------------------------------


def test_c10_self_similarity(cone_a, cone_b, capsys):
    assert np.allclose(cone_a.y, cone_b.y, rtol=1e-13, atol=0)
    err = rel_inf(cone_b.usc, cone_a.usc)
    report(capsys, 10, err <= 1e-4, f"(k, alpha) = (5000, 0.04) vs (2000, 0.0632): "
                                    f"{err:.1e} (<= 1e-4)")
    assert err <= 1e-4
