"""Green's function of the parabolic equation and boundary-integral kernels.

The parabolic equation ``(d/dx + (2ik)^-1 Laplacian_perp) u = 0`` has the
causal Green's function

    g = k / (2 pi i (x - x_s)) exp{ (ik/2) dr^2 / (x - x_s) },   x > x_s,

and the surface kernel is ``K = (i f / k) Nbar[g]`` with
``Nbar = d/dr + i k f'`` acting on the source point. The angular Fourier
components ``K_n(x*, x) = int_0^2pi K(x*, phi, x, 0) exp(-i n phi) dphi`` have
the closed form

    K_n = (i k f / d^2) (-i)^n exp{ik (r*^2 + f^2) / (2d)}
          * [ (f + d f') J_n(c) - i r* J_n'(c) ],     c = k r* f / d,

with ``d = x* - x`` and ``r* = f(x*)`` on the surface. It is evaluated by the
compiled engine in :mod:`petd._engine`; :func:`kernel_modal` computes the
same quantity by angular quadrature and serves as the reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from . import _engine
from .errors import AccuracyError, DomainError
from .geometry import Profile, WaveParams


@dataclass(frozen=True)
class SpacePoint:
    """Point ``(x, r, phi)`` in cylindrical coordinates."""

    x: float
    r: float
    phi: float = 0.0

    def __post_init__(self):
        if self.r < 0:
            raise DomainError(f"radial coordinate must be >= 0, got {self.r}")


def _green(k, dx, dr2):
    return k / (2j * np.pi * dx) * np.exp(0.5j * k * dr2 / dx)


def greens(obs: SpacePoint, src: SpacePoint, wp: WaveParams) -> complex:
    """Causal Green's function ``g(obs, src)``; zero unless ``obs.x > src.x``."""
    dx = obs.x - src.x
    if dx <= 0:
        return 0j
    dr2 = obs.r ** 2 + src.r ** 2 - 2 * obs.r * src.r * math.cos(obs.phi - src.phi)
    return complex(_green(wp.k, dx, dr2))


def greens_dr_source(obs: SpacePoint, src: SpacePoint, wp: WaveParams) -> complex:
    """Derivative of ``g(obs, src)`` with respect to the source radius."""
    dx = obs.x - src.x
    if dx <= 0:
        return 0j
    g = greens(obs, src, wp)
    return g * 1j * wp.k * (src.r - obs.r * math.cos(obs.phi - src.phi)) / dx


def apply_N(du_dr, u, k, f_dot):
    """Neumann boundary operator ``N[u] = du/dr - i k f' u``."""
    return du_dr - 1j * k * f_dot * u


def apply_N_bar(du_dr, u, k, f_dot):
    """Adjoint boundary operator ``Nbar[w] = dw/dr + i k f' w``."""
    return du_dr + 1j * k * f_dot * u


# ------------------------------------------------------------ continuation


def _radial_rule(scale, t_max, panels_per_scale):
    """Gauss-Legendre panels on ``[0, t_max]``."""
    u, w = np.polynomial.legendre.leggauss(10)
    npan = max(2, int(math.ceil(t_max / scale * panels_per_scale)))
    edges = np.linspace(0.0, t_max, npan + 1)
    a, b = edges[:-1, None], edges[1:, None]
    t = 0.5 * (a + b) + 0.5 * (b - a) * u
    wt = 0.5 * (b - a) * w
    return t.ravel(), wt.ravel()


def _angular_modes(v, r, m_start, tol):
    """Fourier modes of ``v(r, phi)`` in phi, grown until the tail is negligible."""
    m = m_start
    while True:
        phi = 2 * np.pi * np.arange(m) / m
        vals = np.asarray(v(r[:, None], phi[None, :]), dtype=complex)
        vals = np.broadcast_to(vals, (r.size, m))
        coef = np.fft.fft(vals, axis=1) / m
        mag = np.max(np.abs(coef), axis=0)
        peak = mag.max()
        if peak == 0.0:
            return np.zeros(1, int), np.zeros((r.size, 1), complex)
        # modes around +-m/2 form the tail
        tail = mag[m // 2 - m // 8: m // 2 + m // 8 + 1].max()
        if tail <= 1e-3 * tol * peak or m >= 4096:
            if tail > 1e-3 * tol * peak:
                raise AccuracyError("angular content of v is not resolved")
            n = np.fft.fftfreq(m, 1.0 / m).astype(int)
            keep = mag > 1e-3 * tol * peak
            return n[keep], coef[:, keep]
        m *= 2


def _propagate_once(v, x0, x, r_t, phi_t, k, rotation, t_max, scale, pps, tol):
    dx = x - x0
    t, wt = _radial_rule(scale, t_max, pps)
    e = np.exp(1j * rotation)
    r = t * e
    n_list, vn = _angular_modes(v, r, 16, tol)
    z = k * np.multiply.outer(r_t, r) / dx  # targets x sources
    # J_n is taken exponentially scaled and the growth folded into the
    # Gaussian: for complex targets on the ray the product stays bounded
    # although each factor alone may overflow
    gauss = np.exp(0.5j * k * (np.add.outer(r_t ** 2, r ** 2)) / dx + np.abs(z.imag))
    base = (k / (1j * dx)) * gauss * (r * wt * e)[None, :]
    out = np.zeros(r_t.shape, complex)
    for n, col in zip(n_list, vn.T):
        jn = special.jve(abs(n), z) * (1 if n >= 0 else (-1) ** abs(n))
        out += (-1j) ** n * np.exp(1j * n * phi_t) * ((base * jn) @ col)
    return out


def propagate(v: Callable, x0: float, x: float, r_t, phi_t, wp: WaveParams,
              tol: float = 1e-10, rotation: float = math.pi / 8,
              max_levels: int = 8) -> np.ndarray:
    """Vectorised continuation integral for many target points on one plane.

    ``v(r, phi)`` must accept broadcast arrays and be analytic in ``r``: the
    radial integral runs along ``r = t exp(i rotation)``, where the Gaussian
    factor of ``g`` decays. The angular integral is done mode by mode, with
    ``int exp(-i z cos psi + i n psi) dpsi = 2 pi (-i)^n J_n(z)``. Targets may
    have complex radius on the same ray, which is what nested propagation
    needs.
    """
    dx = x - x0
    if dx <= 0:
        raise DomainError("target must lie downstream of the source plane")
    k = wp.k
    decay = (k * np.exp(2j * rotation)).imag / (2 * dx)
    if decay <= 0:
        raise DomainError("rotation angle does not damp the Green's function")
    r_t = np.atleast_1d(np.asarray(r_t, dtype=complex))
    phi_t = np.broadcast_to(np.asarray(phi_t, dtype=float), r_t.shape)
    scale = math.sqrt(dx / abs(k))
    b = abs(k) * np.max(np.abs(r_t)) / dx
    t_max = (b + math.sqrt(b * b + 4 * decay * 46.0)) / (2 * decay)
    pps = 2.0
    prev = _propagate_once(v, x0, x, r_t, phi_t, k, rotation, t_max, scale, pps, tol)
    for _ in range(max_levels):
        t_max *= 1.25
        pps *= 1.6
        cur = _propagate_once(v, x0, x, r_t, phi_t, k, rotation, t_max, scale, pps, tol)
        err = np.max(np.abs(cur - prev))
        ref = max(np.max(np.abs(cur)), 1e-300)
        if err <= tol * ref:
            return cur
        prev = cur
    raise AccuracyError("continuation integral did not converge", estimate=cur, error=err)


def continuation_apply(v: Callable, x0: float, target: SpacePoint, wp: WaveParams,
                       tol: float = 1e-10, rotation: float = math.pi / 8) -> complex:
    """Propagate the field ``v`` given on the plane ``x = x0`` to ``target``.

    Evaluates ``int_0^2pi int_0^inf g(target, (x0, r, phi)) v(r, phi) r dr dphi``.
    See :func:`propagate` for the quadrature and the analyticity requirement.
    """
    return complex(propagate(v, x0, target.x, [target.r], [target.phi], wp,
                             tol=tol, rotation=rotation)[0])


# ----------------------------------------------------------------- kernels


@dataclass(frozen=True)
class KernelEvaluator:
    """Kernel of the surface integral equation for one body and wave.

    ``mode`` is ``None`` for the full kernel ``K(x*, phi*, x, phi)`` and an
    integer ``n`` for the modal kernel ``K_n(x*, x)``.
    """

    profile: Profile
    wp: WaveParams
    mode: int | None = None
    coeffs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.ascontiguousarray(self.profile.coeffs, float))

    def with_mode(self, n: int) -> "KernelEvaluator":
        return KernelEvaluator(self.profile, self.wp, n)

    def __call__(self, *args):
        if self.mode is None:
            return kernel_full(self, *args)
        return kernel_modal_closed(self, *args)


def _check_order(ke, x_star, x):
    if not x_star > x:
        raise DomainError(f"kernel needs x_star > x, got {x_star}, {x}")
    p = ke.profile
    if not (p.contains(x) and p.contains(x_star)):
        raise DomainError("kernel arguments outside the profile support")


def kernel_full(ke: KernelEvaluator, x_star: float, phi_star: float, x: float,
                phi: float) -> complex:
    """Full kernel ``K(x*, phi*, x, phi)`` of the surface equation."""
    _check_order(ke, x_star, x)
    p, k = ke.profile, ke.wp.k
    d = x_star - x
    f, F, fd = float(p.f(x)), float(p.f(x_star)), float(p.f_dot(x))
    cs = math.cos(phi - phi_star)
    br = fd / d + (f - F * cs) / d ** 2
    return complex(1j * k * f / (2 * np.pi) * br
                   * np.exp(0.5j * k * (F * F + f * f - 2 * F * f * cs) / d))


def _offsurface_full(ke, x_star, r_star, x, phi):
    """Full kernel with the observation radius ``r_star`` off the surface."""
    p, k = ke.profile, ke.wp.k
    d = x_star - x
    f, fd = p.f(x), p.f_dot(x)
    cs = np.cos(phi)
    br = fd / d + (f - r_star * cs) / d ** 2
    return 1j * k * f / (2 * np.pi) * br * np.exp(
        0.5j * k * (r_star ** 2 + f * f - 2 * r_star * f * cs) / d)


def kernel_modal(ke: KernelEvaluator, x_star: float, x: float,
                 tol: float = 1e-11, r_star: float | None = None,
                 max_nodes: int = 1 << 20) -> complex:
    """Reference modal kernel by the periodic trapezoid rule in the angle.

    The node count is doubled from a resolution estimate until two
    successive sums agree to ``tol`` relative to the integrand scale.
    ``r_star`` replaces ``f(x*)`` for observation points off the surface.
    """
    _check_order(ke, x_star, x)
    n = ke.mode or 0
    rs = float(ke.profile.f(x_star)) if r_star is None else float(r_star)
    c = abs(ke.wp.k) * rs * float(ke.profile.f(x)) / (x_star - x)
    m = 1 << max(4, int(math.ceil(math.log2(2 * (c + abs(n)) + 32))))
    prev = None
    while m <= max_nodes:
        phi = 2 * np.pi * np.arange(m) / m
        vals = _offsurface_full(ke, x_star, rs, x, phi) * np.exp(-1j * n * phi)
        val = vals.mean() * 2 * np.pi
        scale = np.abs(vals).mean() * 2 * np.pi
        if prev is not None and abs(val - prev) <= tol * max(scale, 1e-300):
            return complex(val)
        prev = val
        m *= 2
    raise AccuracyError(
        "angular quadrature of the kernel failed; increase Im k or move away "
        "from the diagonal", estimate=prev)


def kernel_modal_closed(ke: KernelEvaluator, x_star, x, r_star=None):
    """Modal kernel from the closed form, evaluated without cancellation.

    Accepts scalars or arrays of equal shape. Symmetric in the mode sign,
    ``K_{-n} = K_n``.
    """
    xs = np.atleast_1d(np.asarray(x_star, float))
    xx = np.atleast_1d(np.asarray(x, float))
    xs, xx = np.broadcast_arrays(xs, xx)
    if np.any(xs <= xx):
        raise DomainError("kernel needs x_star > x")
    rs = ke.profile.f(xs) if r_star is None else np.broadcast_to(np.asarray(r_star, float), xs.shape)
    out = _engine.kernel_grid(abs(ke.mode or 0), ke.wp.k, ke.coeffs,
                              np.ascontiguousarray(xs, float).ravel(),
                              np.ascontiguousarray(rs, float).ravel(),
                              np.ascontiguousarray(xx, float).ravel()).reshape(xs.shape)
    return complex(out[0]) if np.ndim(x_star) == 0 and np.ndim(x) == 0 else out


def kernel_cone0(wp: WaveParams, alpha: float, x_star: float, x: float) -> complex:
    """Axisymmetric cone kernel in closed form.

    ``K_0 = (i k a2 x* x / d^2) exp{i k a2 (x*^2 + x^2) / (2d)} [J_0(c) + i J_1(c)]``
    with ``a2 = alpha^2``, ``d = x* - x`` and ``c = k a2 x* x / d``.
    """
    if not x_star > x > 0:
        raise DomainError("need x_star > x > 0")
    k = wp.k
    a2 = alpha * alpha
    d = x_star - x
    c = k * a2 * x_star * x / d
    # the exponent and the Bessel growth are combined through scaled Hankels
    bracket = 0.5 * (special.hankel1e(0, c) + 1j * special.hankel1e(1, c)) * np.exp(
        0.5j * k * a2 * (x_star + x) ** 2 / d)
    bracket += 0.5 * (special.hankel2e(0, c) + 1j * special.hankel2e(1, c)) * np.exp(
        0.5j * k * a2 * (x_star - x) ** 2 / d)
    return complex(1j * k * a2 * x_star * x / d ** 2 * bracket)
