"""Closed-form field of a cone under axial incidence.

With ``y = k alpha^2 x`` and ``rho = r / (alpha x)`` the scattered field is

    u^sc = (i/y) e^{i y rho^2 / 2} int_0^inf F_rho(s) exp{i s^2 / (2y)} s ds,
    F_rho(s) = J0'(s) H0(rho s) / H0'(s) = J1(s) H0(rho s) / H1(s),

where H denotes Hankel functions of the first kind. On the surface
``rho = 1``. Writing ``J1 = (H1 + H2)/2`` splits the integrand into

* part A, ``H0(rho s) / 2``, oscillating like ``e^{i rho s}``;
* part B, ``(H2_1 / H1_1)(s) H0(rho s) / 2``, oscillating like
  ``e^{i(rho - 2)s}``, whose stationary point ``s = (2 - rho) y`` is the
  reflected wave.

Each part is integrated along its own ray ``s = t e^{i delta}`` in the upper
half plane. For part B with ``rho < 2`` the ray angle is limited so that the
transient growth ``exp(b^2 y tan(delta) / 4)``, ``b = rho - 2``, stays below
``e^3``. Principal branches are used throughout; along the rays all Hankel
arguments stay in the closed first quadrant, where ``H1_1`` has no zeros.

Complex ``y`` (complex k) is accepted provided ``arg y`` is small, so the
formulas can be compared directly with solver runs at ``Im k > 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .errors import AccuracyError, DomainError
from .geometry import WaveParams
from .numerics import QuadResult, QuadratureSpec, damped_real_axis, parabolic_cylinder_D_neg32, ray_integral

RTOL = 1e-10
DELTA_A = math.pi / 4
DELTA_B_MAX = math.pi / 6
GROWTH_B = 12.0  # b^2 y tan(delta) <= 12, i.e. growth <= e^3


@dataclass(frozen=True)
class SelfSimilarCoord:
    """Self-similar variable ``y = Re(k) alpha^2 x`` and the scale ``x_c = 1/(k alpha^2)``."""

    y: float
    x_c: float

    @classmethod
    def from_physical(cls, wp: WaveParams, alpha: float, x: float) -> "SelfSimilarCoord":
        s = wp.k.real * alpha * alpha
        return cls(s * x, 1.0 / s)


def _part_a(rho):
    def f(s):
        return 0.5 * special.hankel1e(0, rho * s) * s
    return f


def _part_b(rho):
    def f(s):
        return 0.5 * special.hankel2e(1, s) / special.hankel1e(1, s) * special.hankel1e(0, rho * s) * s
    return f


def _field_integral(y, rho, rtol=RTOL) -> QuadResult:
    """``int F_rho(s) exp(i s^2 / 2y) s ds`` by the two-ray split."""
    y = complex(y)
    if y == 0:
        raise DomainError("y must be nonzero")
    if abs(np.angle(y)) >= DELTA_B_MAX:
        raise DomainError("arg y too large for the contour rotation")
    fa, fb = _part_a(rho), _part_b(rho)
    b = rho - 2.0
    ga = lambda s: fa(s) * np.exp(1j * rho * s + 0.5j * s * s / y)
    gb = lambda s: fb(s) * np.exp(1j * b * s + 0.5j * s * s / y)
    ra = ray_integral(ga, np.exp(1j * DELTA_A), rtol=rtol, scale=1.0 / max(rho, 1.0))
    if b >= 0:
        db = DELTA_A
    else:
        db = min(DELTA_B_MAX, math.atan(GROWTH_B / (b * b * abs(y))))
    # the Gaussian factor must decay along the ray
    db = max(db, abs(np.angle(y)) + 0.02)
    rb = ray_integral(gb, np.exp(1j * db), rtol=rtol, scale=max(1.0, abs(b) * abs(y) / 4))
    return QuadResult(ra.value + rb.value, ra.error + rb.error)


def surface_field_sc(y, rtol: float = RTOL) -> complex:
    """Scattered field on the cone surface as a function of ``y = k alpha^2 x``.

    The total surface field is ``1 + surface_field_sc(y)``; the limit at
    ``y = 0`` is 0.
    """
    if np.ndim(y):
        return np.array([surface_field_sc(v, rtol) for v in np.ravel(y)]).reshape(np.shape(y))
    y = complex(y)
    if y == 0:
        return 0j
    if y.real < 0:
        raise DomainError("y must be positive")
    r = _field_integral(y, 1.0, rtol)
    return complex(1j / y * np.exp(0.5j * y) * r.value)


def surface_field(y, rtol: float = RTOL):
    """Total surface field ``1 + U^sc(y)``."""
    return 1.0 + surface_field_sc(y, rtol)


def surface_field_sc_real_axis(y: float, eps0: float = 0.05, levels: int = 7,
                               rtol: float = 1e-9) -> complex:
    """Independent evaluation along the real axis, regularised in y.

    For real y the integral converges only conditionally. At
    ``y (1 - i eps)`` the Gaussian factor decays on the real axis, so
    ``U^sc`` is integrated there for ``eps = eps0 / 2^j`` and extrapolated to
    ``eps = 0`` with a Neville table (the value is analytic in eps).
    Absorption (``Im y > 0``) has the opposite effect on this representation
    and is handled by the rotated rays of :func:`surface_field_sc`.
    """
    def f(s):
        s = np.asarray(s, complex)
        zero = s == 0
        s = np.where(zero, 1.0, s)
        val = special.jv(1, s) * special.hankel1(0, s) / special.hankel1(1, s) * s
        # J1 H0 / H1 times s vanishes at s = 0
        return np.where(zero, 0, val)

    table = []
    for j in range(levels):
        eps = eps0 / 2 ** j
        yc = y * (1 - 1j * eps)
        width = math.sqrt(2 * abs(yc) ** 2 * 46 / (eps * y))
        g = lambda s, yc=yc: f(s) * np.exp(0.5j * s * s / yc)
        from .numerics import adaptive_quad
        r = adaptive_quad(g, 0.0, width, rtol=0.1 * rtol, max_panels=200000, init_panels=64)
        val = 1j / yc * np.exp(0.5j * yc) * r.value
        row = [val]
        for m in range(1, j + 1):
            row.append(row[m - 1] + (row[m - 1] - table[j - 1][m - 1]) / (2 ** m - 1))
        table.append(row)
        if j >= 3 and abs(row[j] - row[j - 1]) <= rtol * abs(row[j]):
            return complex(row[j])
    err = abs(table[-1][-1] - table[-1][-2])
    if err > 1e3 * rtol * abs(table[-1][-1]):
        raise AccuracyError("damped real-axis evaluation did not converge",
                            estimate=table[-1][-1], error=err)
    return complex(table[-1][-1])


def offsurface_field(wp: WaveParams, alpha: float, x: float, r: float,
                     rtol: float = RTOL) -> complex:
    """Scattered field at ``(x, r)`` outside the cone, ``r >= alpha x``."""
    if x <= 0:
        raise DomainError("x must be positive")
    if r < alpha * x * (1 - 1e-12):
        raise DomainError("point lies inside the cone")
    y = wp.k * alpha * alpha * x
    rho = r / (alpha * x)
    res = _field_integral(y, rho, rtol)
    # the prefactor carries exp(ik r^2 / 2x); exp(iy/2) holds only on the surface
    return complex(1j / y * np.exp(0.5j * y * rho * rho) * res.value)


def asympt_constant_P(delta: float = math.pi / 6, rtol: float = 1e-12) -> QuadResult:
    """Diffracted-ray amplitude ``P = i int_0^inf J0'H0/H0' s ds``.

    The integral is defined by analytic regularisation: part A is rotated to
    ``+delta`` and part B, which decays in the lower half plane, to
    ``-delta``. ``H1_1`` has no zeros in the fourth quadrant.
    """
    if not 0 < delta < math.pi / 2:
        raise DomainError("rotation angle must lie in (0, pi/2)")
    fa, fb = _part_a(1.0), _part_b(1.0)
    ra = ray_integral(lambda s: fa(s) * np.exp(1j * s), np.exp(1j * delta), rtol=rtol)
    rb = ray_integral(lambda s: fb(s) * np.exp(-1j * s), np.exp(-1j * delta), rtol=rtol)
    return QuadResult(1j * (ra.value + rb.value), ra.error + rb.error)


@dataclass(frozen=True)
class FarFieldFit:
    """Least-squares fit of ``(U^sc(y) - 1) y e^{-iy/2} = P_fit + c e^{-iy/2}``.

    ``c`` collects the ``1/y`` correction of the reflected wave,
    ``U^sc = 1 + c / y + P e^{iy/2} / y + O(y^-2)``; numerically ``c = -i``.
    ``naive`` is the plain mean of the left-hand side (the fit with ``c = 0``).
    """

    p_fit: complex
    c: complex
    naive: complex
    y: np.ndarray
    samples: np.ndarray


def far_field_fit(y0: float = 100.0, y1: float = 400.0, n: int = 61) -> FarFieldFit:
    """Regress the analytic surface field on its large-y form over ``[y0, y1]``."""
    if not 0 < y0 < y1:
        raise DomainError("need 0 < y0 < y1")
    ys = np.linspace(y0, y1, n)
    v = (surface_field_sc(ys) - 1.0) * ys * np.exp(-0.5j * ys)
    A = np.column_stack([np.ones_like(ys), np.exp(-0.5j * ys)])
    coef = np.linalg.lstsq(A, v, rcond=None)[0]
    return FarFieldFit(complex(coef[0]), complex(coef[1]), complex(v.mean()), ys, v)


# ------------------------------------------------------------------ penumbra


def penumbra_field(wp: WaveParams, alpha: float, x: float, r: float,
                   variant: str = "derived") -> complex:
    """Parabolic-cylinder approximation near the reflected-ray boundary ``r = 2 alpha x``.

    With ``gamma = 2 alpha - r/x`` and ``D`` the integral-defined
    :func:`petd.numerics.parabolic_cylinder_D_neg32`:

    * ``variant="derived"`` (default), the leading term of the reflected
      part of the closed-form field expanded about ``s = 0``::

          (sqrt(2)/4) e^{i pi/8} (kx)^{-1/4} sqrt(x/r)
              exp{i k r^2 / (2x) - i kx gamma^2 / 2} D(sqrt(kx) gamma e^{3 i pi/4})

      Its relative error is about ``1.5 / sqrt(k alpha^2 x)`` on
      ``|gamma| sqrt(kx) <= 2`` and depends on ``k alpha^2 x`` only.

    * ``variant="printed"``, the commonly quoted form::

          -i e^{i pi/8} (kx)^{-1/4} sqrt(x/r)
              exp{i (kx/2) tan^2 alpha - kx gamma^2} D(sqrt(kx) gamma e^{3 i pi/4})

      It is kept for comparison only and does not agree with
      :func:`offsurface_field`.
    """
    k = wp.k
    kx = k * x
    g = 2 * alpha - r / x
    z = np.sqrt(kx) * g * np.exp(0.75j * np.pi)
    d = parabolic_cylinder_D_neg32(z)
    amp = kx ** -0.25 * math.sqrt(x / r) * np.exp(0.125j * np.pi)
    if variant == "derived":
        ph = 0.5j * kx * ((r / x) ** 2 - g * g)
        return complex(math.sqrt(2) / 4 * amp * np.exp(ph) * d)
    if variant == "printed":
        ph = 0.5j * kx * math.tan(alpha) ** 2
        return complex(-1j * amp * np.exp(ph - kx * g * g) * d)
    raise ValueError(f"unknown variant {variant!r}")


# -------------------------------------------------------- convolution form


@dataclass(frozen=True)
class ConvolutionPieces:
    """Closed forms of the convolution representation in ``tau = 1/x``.

    The kernel factorises as ``K_0(x*, x) = tau^2 zeta(tau) G(tau - tau*) / zeta(tau*)``
    and ``V(tau) = zeta(tau) U(1/tau)`` solves
    ``V(t*) = int_{t*}^inf G(t - t*) V(t) dt + 2 zeta(t*)``. Transforms use
    ``p~(lam) = int p(tau) e^{-i lam tau} d tau``; ``zeta_hat`` is the
    transform of the right-hand side ``2 zeta`` and ``G_hat`` is
    ``int_0^inf G(xi) e^{+i lam xi} d xi``.
    """

    k: complex
    alpha: float

    @property
    def a2k(self):
        return self.k * self.alpha ** 2

    def zeta(self, tau):
        return self.k / tau * np.exp(-0.5j * self.a2k / tau)

    def G(self, xi):
        c = self.a2k / xi
        return 1j * self.a2k / xi ** 2 * np.exp(1j * c) * (special.jv(0, c) + 1j * special.jv(1, c))

    def _s(self, lam):
        return np.sqrt(2 * self.a2k * np.asarray(lam, complex))

    def zeta_hat(self, lam):
        lam_c = np.asarray(lam, complex)
        val = -4j * np.pi * self.k * special.jv(0, self._s(lam_c))
        return np.where(lam_c.real < 0, 0, val) if np.isrealobj(lam) else val

    def G_hat(self, lam):
        s = self._s(lam)
        return 1 + 1j * np.pi * s * special.jv(0, s) * (-special.hankel1(1, s))

    def V_hat(self, lam):
        """``zeta_hat / (1 - G_hat)``, equal to ``-4k / (s H1_1(s))``."""
        return self.zeta_hat(lam) / (1 - self.G_hat(lam))

    def kernel_from_factors(self, x_star, x):
        t, ts = 1.0 / x, 1.0 / x_star
        return t * t * self.zeta(t) / self.zeta(ts) * self.G(t - ts)


def convolution_pieces(wp: WaveParams, alpha: float) -> ConvolutionPieces:
    """Convolution-form building blocks for a cone of slope ``alpha``."""
    return ConvolutionPieces(wp.k, alpha)


def zeta_hat_numeric(pieces: ConvolutionPieces, lam: float, eps: float | None = None,
                     spec: QuadratureSpec | None = None) -> complex:
    """Transform of ``2 zeta`` by direct quadrature along ``Im tau = eps``.

    The essential singularity at ``tau = 0`` is passed above, where
    ``exp(-i a / tau)`` is bounded; the slowly decaying ``1/tau`` tails are
    regularised by Abel damping with extrapolation to zero damping.
    """
    a = 0.5 * pieces.a2k
    eps = abs(a) if eps is None else eps
    spec = spec or QuadratureSpec(relative_tolerance=1e-8, contour_rotation_angle=0.0)

    def h(t):
        tau = t + 1j * eps
        return 2 * pieces.k / tau * np.exp(-1j * a / tau - 1j * lam * tau)

    right = damped_real_axis(lambda t: h(t), spec, scale=max(eps, 1.0 / max(abs(lam), 1e-3)))
    left = damped_real_axis(lambda t: h(-t), spec, scale=max(eps, 1.0 / max(abs(lam), 1e-3)))
    return complex(right.value + left.value)


def appendix_surface_field(y: float, k: float = 1000.0, alpha: float = 0.1,
                           delta: float = math.pi / 4, rtol: float = 1e-9) -> complex:
    """Total surface field from the Fourier solution of the convolution equation.

    ``V(tau) = (1/2pi) int_0^inf V_hat(lam) e^{i lam tau} d lam`` is integrated
    along a ray in the lambda plane using the closed forms of ``zeta_hat``
    and ``G_hat``, and ``U(x) = V(1/x) / zeta(1/x)``.
    """
    pc = ConvolutionPieces(complex(k), alpha)
    x = y / (k * alpha ** 2)
    tau = 1.0 / x
    g = lambda lam: pc.V_hat(lam) * np.exp(1j * lam * tau)
    r = ray_integral(g, np.exp(1j * delta), rtol=rtol, scale=1.0 / tau)
    V = r.value / (2 * np.pi)
    return complex(V / pc.zeta(tau))
