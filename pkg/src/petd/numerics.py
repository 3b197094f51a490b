"""Special functions of complex argument and oscillatory quadrature.

Bessel and Hankel functions are thin wrappers over :mod:`scipy.special`
(AMOS) with the working-range checks used throughout the package. The hot
loops of the Volterra solver use the compiled series/asymptotic versions in
``petd._bessel_nb`` which are validated against these wrappers.

Conventions
-----------
Time dependence ``exp(-i w t)`` is assumed, so outgoing waves carry
``exp(+ikx)`` and the limiting absorption ``Im k > 0`` damps them.
A dot on a Bessel function means the derivative with respect to its
argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import special

from .errors import AccuracyError, DomainError, SingularityError

Z_MAX = 1e4
ORDER_MAX = 64

# Gauss-Kronrod 7/15 nodes and weights on [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])
GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
GK_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
GK_WG = np.zeros(15)
GK_WG[1:7:2] = _WG[:3]  # nodes -x[1], -x[3], -x[5]
GK_WG[7] = _WG[3]
GK_WG[9:15:2] = _WG[2::-1]


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerance and contour settings for a quadrature.

    Parameters
    ----------
    relative_tolerance : float
        Target relative error, ``0 < tol < 1``.
    max_subdivisions : int
        Maximum number of Gauss-Kronrod panels.
    contour_rotation_angle : float
        Rotation ``delta`` of the ray ``t exp(i delta)``, ``0 <= delta < pi/2``.
        Zero selects the real-axis fallback directly.
    absolute_tolerance : float
        Floor below which errors are not refined.
    """

    relative_tolerance: float = 1e-8
    max_subdivisions: int = 4000
    contour_rotation_angle: float = math.pi / 6
    absolute_tolerance: float = 1e-300

    def __post_init__(self):
        if not 0.0 < self.relative_tolerance < 1.0:
            raise DomainError("relative_tolerance must lie in (0, 1)")
        if not 0.0 <= self.contour_rotation_angle < math.pi / 2:
            raise DomainError("contour_rotation_angle must lie in [0, pi/2)")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be positive")


class QuadResult(NamedTuple):
    """Quadrature value with its error estimate."""

    value: complex
    error: float


# ------------------------------------------------------------ special functions


def _check_order(order):
    if int(order) != order or order < 0 or order > ORDER_MAX:
        raise DomainError(f"order must be an integer in [0, {ORDER_MAX}], got {order}")
    return int(order)


def _check_arg(z):
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise DomainError("argument must be finite")
    if np.any(np.abs(z) >= Z_MAX):
        raise DomainError(f"|z| must be below {Z_MAX:g}")
    return z


def _out(v):
    return complex(v) if np.ndim(v) == 0 else v


def bessel_j(order: int, z):
    """Bessel function of the first kind ``J_order(z)``."""
    n = _check_order(order)
    return _out(special.jv(n, _check_arg(z)))


def bessel_j_deriv(order: int, z):
    """Derivative ``J'_order(z)`` via ``J'_n = (J_{n-1} - J_{n+1})/2``."""
    n = _check_order(order)
    z = _check_arg(z)
    if n == 0:
        return _out(-special.jv(1, z))
    return _out(0.5 * (special.jv(n - 1, z) - special.jv(n + 1, z)))


def bessel_y(order: int, z):
    """Bessel function of the second kind ``Y_order(z)``, ``z != 0``."""
    n = _check_order(order)
    z = _check_arg(z)
    if np.any(z == 0):
        raise SingularityError("Y_n is singular at z = 0")
    return _out(special.yv(n, z))


def bessel_y_deriv(order: int, z):
    """Derivative ``Y'_order(z)``."""
    n = _check_order(order)
    z = _check_arg(z)
    if np.any(z == 0):
        raise SingularityError("Y_n is singular at z = 0")
    if n == 0:
        return _out(-special.yv(1, z))
    return _out(0.5 * (special.yv(n - 1, z) - special.yv(n + 1, z)))


def hankel1(order: int, z):
    """Hankel function ``H^(1)_order(z) = J + iY`` for ``Im z >= 0``."""
    n = _check_order(order)
    z = _check_arg(z)
    if np.any(z == 0):
        raise SingularityError("H^(1)_n has a singularity at z = 0")
    if np.any(z.imag < -1e-12 * np.abs(z)):
        raise DomainError("hankel1 is documented for Im z >= 0")
    return _out(special.hankel1(n, z))


def hankel1_deriv(order: int, z):
    """Derivative of ``H^(1)_order``; ``H^(1)'_0 = -H^(1)_1``."""
    n = _check_order(order)
    z = _check_arg(z)
    if np.any(z == 0):
        raise SingularityError("H^(1)_n has a singularity at z = 0")
    if n == 0:
        return _out(-special.hankel1(1, z))
    return _out(0.5 * (special.hankel1(n - 1, z) - special.hankel1(n + 1, z)))


# --------------------------------------------------------- adaptive quadrature


def adaptive_quad(func: Callable, a: float, b: float, rtol: float = 1e-10,
                  atol: float = 0.0, max_panels: int = 4000,
                  init_panels: int = 1) -> QuadResult:
    """Globally adaptive Gauss-Kronrod (7/15) quadrature of a complex integrand.

    ``func`` receives a 1-D array of real abscissae and returns values of the
    same shape. All panels are refined in vectorised batches.

    Raises
    ------
    AccuracyError
        If the tolerance is not met with ``max_panels`` panels.
    """
    edges = np.linspace(a, b, init_panels + 1)
    lo, hi = edges[:-1], edges[1:]
    done_val = 0j
    done_err = 0.0
    done_mag = 0.0
    created = lo.size
    while True:
        c = 0.5 * (lo + hi)
        h = 0.5 * (hi - lo)
        x = c[:, None] + h[:, None] * GK_NODES[None, :]
        fx = np.asarray(func(x.ravel()), dtype=complex).reshape(x.shape)
        if not np.all(np.isfinite(fx)):
            raise AccuracyError("non-finite integrand values")
        vk = h * (fx @ GK_WK)
        vg = h * (fx @ GK_WG)
        err = np.abs(vk - vg)
        total = done_val + vk.sum()
        tot_err = done_err + err.sum()
        mag = done_mag + float(np.sum(np.abs(h) * (np.abs(fx) @ GK_WK)))
        # rounding floor: no tolerance below what cancellation allows
        target = max(atol, rtol * abs(total), 1e-15 * mag)
        if tot_err <= target:
            return QuadResult(complex(total), float(tot_err))
        npan = lo.size
        if created + npan > max_panels:
            raise AccuracyError(
                f"adaptive quadrature did not converge on [{a}, {b}]",
                estimate=complex(total), error=float(tot_err))
        # keep panels whose share of the error is already small
        share = target / max(npan, 1)
        bad = err > 0.5 * share
        if not np.any(bad):
            bad = err >= err.max()
        done_val += vk[~bad].sum()
        done_err += err[~bad].sum()
        done_mag += float(np.sum(np.abs(h[~bad]) * (np.abs(fx[~bad]) @ GK_WK)))
        lb, hb = lo[bad], hi[bad]
        mid = 0.5 * (lb + hb)
        lo = np.concatenate([lb, mid])
        hi = np.concatenate([mid, hb])
        created += 2 * lb.size


def ray_integral(func: Callable, direction: complex, rtol: float = 1e-10,
                 atol: float = 0.0, scale: float = 1.0, start: float = 0.0,
                 max_panels: int = 4000, max_length: float = 1e7) -> QuadResult:
    """Integral of an analytic ``func`` along ``z = z0 + t*direction``, t >= 0.

    The ray is covered by chunks of doubling length; integration stops once
    two consecutive chunks contribute below tolerance. ``direction`` must
    have unit modulus; the returned value includes the factor ``dz/dt``.
    """
    z0 = complex(start)
    g = lambda t: func(z0 + direction * t) * direction
    total = 0j
    err = 0.0
    lo = 0.0
    width = float(scale)
    quiet = 0
    while lo < max_length:
        hi = lo + width
        catol = max(atol, 0.01 * rtol * abs(total))
        r = adaptive_quad(g, lo, hi, rtol=rtol * 0.1, atol=catol, max_panels=max_panels,
                          init_panels=4)
        total += r.value
        err += r.error
        small = abs(r.value) + r.error <= max(atol, 0.1 * rtol * abs(total))
        quiet = quiet + 1 if small else 0
        if quiet >= 2:
            return QuadResult(total, err)
        lo = hi
        width *= 2.0
    raise AccuracyError("ray integral did not decay", estimate=total, error=err)


def oscillatory_integral(integrand: Callable, spec: QuadratureSpec | None = None,
                         scale: float = 1.0) -> QuadResult:
    """Integral of an analytic integrand over ``[0, inf)``.

    The contour is rotated to ``t exp(i delta)`` with
    ``delta = spec.contour_rotation_angle``, turning oscillation into decay.
    If that angle is zero, or the rotated integral fails, the real-axis
    integral is computed with Abel damping ``exp(-eps t)`` for three values
    of ``eps`` and Richardson-extrapolated to ``eps = 0``.

    Parameters
    ----------
    integrand : callable
        Vectorised function of a complex array.
    spec : QuadratureSpec, optional
    scale : float
        Length scale of the integrand, used to size the first chunks.

    Returns
    -------
    QuadResult
    """
    spec = spec or QuadratureSpec()
    tol = spec.relative_tolerance
    delta = spec.contour_rotation_angle
    if delta > 0:
        try:
            return ray_integral(integrand, np.exp(1j * delta), rtol=tol,
                                atol=spec.absolute_tolerance, scale=scale,
                                max_panels=spec.max_subdivisions)
        except AccuracyError:
            pass
    return damped_real_axis(integrand, spec, scale=scale)


def damped_real_axis(integrand: Callable, spec: QuadratureSpec | None = None,
                     scale: float = 1.0, eps0: float | None = None,
                     levels: int = 7) -> QuadResult:
    """Abel-regularised real-axis integral with Richardson extrapolation.

    ``I(eps) = int_0^inf f(t) exp(-eps t) dt`` is computed for
    ``eps = eps0 / 2^j`` and extrapolated to ``eps = 0`` with a Neville
    table, assuming ``I(eps)`` is smooth in ``eps``.
    """
    spec = spec or QuadratureSpec()
    tol = spec.relative_tolerance
    eps0 = eps0 if eps0 is not None else 0.25 / scale
    table = []
    qerr = 0.0
    best = None
    best_err = np.inf
    for j in range(levels):
        eps = eps0 / 2 ** j
        f = lambda t, e=eps: integrand(t.astype(complex)) * np.exp(-e * t)
        r = ray_integral(f, 1.0 + 0j, rtol=0.1 * tol, atol=spec.absolute_tolerance,
                         scale=scale, max_panels=spec.max_subdivisions)
        qerr = max(qerr, r.error)
        row = [r.value]
        for m in range(1, j + 1):
            # extrapolation in eps with ratio 2
            row.append(row[m - 1] + (row[m - 1] - table[j - 1][m - 1]) / (2 ** m - 1))
        table.append(row)
        if j >= 2:
            err = abs(row[j] - row[j - 1]) + qerr
            if err < best_err:
                best, best_err = row[j], err
            if err <= max(spec.absolute_tolerance, tol * abs(row[j])):
                return QuadResult(complex(row[j]), float(err))
    raise AccuracyError("damped real-axis quadrature did not converge",
                        estimate=best, error=best_err)


# ------------------------------------------------------ parabolic cylinder D


def _d32_integrand(z):
    # s = t^2 turns the s^(1/2) endpoint singularity into a smooth factor
    return lambda t: 2.0 * t * t * np.exp(-z * t * t - 0.5 * t ** 4)


def _d32_extent(z):
    """Upper limit in t beyond which the integrand is below exp(-50) of peak."""
    zr = z.real
    peak = 0.5 * zr * zr if zr < 0 else 0.0
    # solve t^4/2 + zr t^2 = 50 + peak for t^2
    s2 = -zr + math.sqrt(zr * zr + 2.0 * (50.0 + peak))
    return math.sqrt(max(s2, 1e-12))


def d32_bare_integral(z: complex, rtol: float = 1e-12) -> QuadResult:
    """``int_0^inf exp(-z s - s^2/2) s^(1/2) ds`` by adaptive Gauss-Kronrod."""
    z = complex(z)
    tmax = _d32_extent(z)
    f = _d32_integrand(z)
    return adaptive_quad(lambda t: f(t), 0.0, tmax, rtol=rtol, init_panels=8)


def parabolic_cylinder_D_neg32(z) -> complex:
    """``D_{-3/2}(z)`` in the integral normalisation used by the penumbra formula.

    ``D(z) = (2/sqrt(pi)) exp(-z^2/2) int_0^inf exp(-z s - s^2/2) s^(1/2) ds``.

    Note the prefactor ``exp(-z^2/2)``; the customary Whittaker function
    carries ``exp(-z^2/4)``. The penumbra formula uses this same integral, so
    the convention is kept as the definition.
    """
    z = complex(z)
    if not np.isfinite(z):
        raise DomainError("argument must be finite")
    r = d32_bare_integral(z)
    return complex(2.0 / math.sqrt(math.pi) * np.exp(-0.5 * z * z) * r.value)
