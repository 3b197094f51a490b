"""Fields away from the surface, directivity and the optical-theorem balance.

All functions take the surface solution as a mapping ``{n: ModalSurfaceField}``
(a single field is treated as mode 0). The angular integrals are done per
mode in closed form, the axial ones against the piecewise-linear
interpolant of ``U_n`` that the solver itself uses.

With ``u^sc(r*) = (i/2k) int int Nbar[g(r*, r)] U f dx dphi`` and the surface
kernel ``K = (i f / k) Nbar[g]``,

    u^sc(x*, r*, phi*) = (1/2) sum_n e^{i n phi*} int K_n(x*, r*; x) U_n(x) dx,

where ``K_n`` is the modal kernel evaluated with the observation radius
``r*`` in place of ``f(x*)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import special

from . import _engine
from .errors import AccuracyError, ConsistencyError, DomainError
from .geometry import Profile, WaveParams
from .kernels import SpacePoint
from .volterra import AxialGrid, ModalSurfaceField

DIRECTIVITY_TOL = 1e-4
PHASE_PER_SUB = 1.5  # largest phase change per 8-point sub-panel
OT_DECAY = 1e-4  # truncation level of the transverse integral


def _as_modes(U) -> dict:
    if isinstance(U, ModalSurfaceField):
        return {U.mode: U}
    if not isinstance(U, Mapping) or not U:
        raise DomainError("surface field must be a ModalSurfaceField or a non-empty mode map")
    grids = {id(f.grid) for f in U.values()}
    if len(grids) > 1:
        ref = next(iter(U.values())).grid.nodes
        if any(f.grid.nodes.shape != ref.shape or np.any(f.grid.nodes != ref) for f in U.values()):
            raise DomainError("all modes must share one axial grid")
    return dict(U)


def _grid(modes) -> AxialGrid:
    return next(iter(modes.values())).grid


def _paired(modes):
    """Group modes by ``|n|``; yields ``(|n|, [(n, field), ...])``."""
    groups: dict[int, list] = {}
    for n, f in modes.items():
        groups.setdefault(abs(n), []).append((n, f))
    return sorted(groups.items())


# ----------------------------------------------------------- reconstruction


def _check_target(profile: Profile, target: SpacePoint):
    if not target.x > profile.x_start:
        raise DomainError("target must lie downstream of the body's leading end")
    if target.r < 0:
        raise DomainError("target radius must be non-negative")
    if profile.contains(target.x) and target.r <= profile.f(target.x):
        raise DomainError("target lies inside the body or on its surface")


def reconstruct_point(U, profile: Profile, wp: WaveParams, target: SpacePoint,
                      total: bool = False) -> complex:
    """Scattered (or total) field at a point outside the body.

    Parameters
    ----------
    U : dict or ModalSurfaceField
        Total surface field per angular mode.
    profile, wp : Profile, WaveParams
        Body and wave the surface field belongs to.
    target : SpacePoint
        Observation point with ``r > f(x)`` where the body extends.
    total : bool
        Add the incident wave ``exp{ik(theta r cos phi - x theta^2 / 2)}``.

    Notes
    -----
    Observation points level with the body (``x`` inside the support) need
    ``Im k > 0``, because the axial integral then ends at ``x`` itself where
    the Green's function is a narrow Gaussian. Points downstream of a
    compact body accept real k.
    """
    _check_target(profile, target)
    modes = _as_modes(U)
    nodes = _grid(modes).nodes
    coeffs = np.ascontiguousarray(profile.coeffs, float)
    row = np.empty(nodes.size, complex)
    acc = 0j
    for m, members in _paired(modes):
        try:
            _engine.row_weights(m, wp.k, float(target.x), float(target.r), nodes, coeffs, row)
        except ValueError as exc:
            raise DomainError(f"{exc}; observation points level with the body need Im k > 0") from exc
        for n, f in members:
            acc += np.exp(1j * n * target.phi) * (row @ f.values)
    usc = 0.5 * acc
    if total:
        k, th = wp.k, wp.theta
        usc += np.exp(1j * k * (th * target.r * math.cos(target.phi) - 0.5 * target.x * th * th))
    return complex(usc)


def reconstruct_modes(U, profile: Profile, wp: WaveParams, x: float, r) -> dict:
    """Angular coefficients ``u^sc_n(x, r)`` on an array of radii.

    ``u^sc(x, r, phi) = sum_n u_n(r) e^{i n phi}``. Used for plane integrals.
    """
    modes = _as_modes(U)
    nodes = _grid(modes).nodes
    coeffs = np.ascontiguousarray(profile.coeffs, float)
    r = np.atleast_1d(np.asarray(r, float))
    for rv in r:
        _check_target(profile, SpacePoint(x, float(rv), 0.0))
    out = {n: np.empty(r.size, complex) for n in modes}
    row = np.empty(nodes.size, complex)
    for i, rv in enumerate(r):
        for m, members in _paired(modes):
            _engine.row_weights(m, wp.k, float(x), float(rv), nodes, coeffs, row)
            for n, f in members:
                out[n][i] = 0.5 * (row @ f.values)
    return out


# --------------------------------------------------------------- directivity


@dataclass(frozen=True)
class Directivity:
    """Diffraction coefficient ``T(theta*, phi*)``.

    The far field is ``u^sc(L, theta* L, phi*) ~ k/(2 pi i L) exp(ik L theta*^2/2) T``.
    ``reference`` holds the two-dimensional quadrature value used to check
    the modal series, when it was computed.
    """

    theta_star: float
    phi_star: float
    value: complex
    reference: complex | None = None
    meta: dict = field(default_factory=dict)


def _axial_rule(nodes, profile: Profile, k, theta_star):
    """Gauss-Legendre points on each panel, split so the phase stays resolved.

    Returns points, weights, left node index and hat coordinate.
    """
    u, w = np.polynomial.legendre.leggauss(8)
    a, b = nodes[:-1], nodes[1:]
    kr = abs(k)
    ph = kr * theta_star * np.abs(profile.f(b) - profile.f(a)) \
        + 0.5 * kr * theta_star ** 2 * (b - a)
    nsub = np.maximum(1, np.ceil(ph / PHASE_PER_SUB)).astype(int)
    xs, ws, left, lam = [], [], [], []
    for m in np.unique(nsub):
        idx = np.nonzero(nsub == m)[0]
        h = (b[idx] - a[idx]) / m
        for s in range(m):
            lo = a[idx] + s * h
            x = lo[:, None] + 0.5 * h[:, None] * (u[None, :] + 1)
            xs.append(x.ravel())
            ws.append((0.5 * h[:, None] * w[None, :]).ravel())
            left.append(np.repeat(idx, u.size))
            lam.append(((x - a[idx, None]) / (b[idx] - a[idx])[:, None]).ravel())
    return (np.concatenate(xs), np.concatenate(ws), np.concatenate(left),
            np.concatenate(lam))


def _interp(values, left, lam):
    return (1 - lam) * values[left] + lam * values[left + 1]


def _check_compact(profile: Profile):
    if not profile.is_compact:
        raise DomainError("directivity needs a compact body (finite axial extent)")


def _series_terms(modes, profile: Profile, wp: WaveParams, theta_star: float) -> dict:
    """Per-mode terms ``t_n`` with ``T(theta*, phi*) = sum_n t_n e^{i n phi*}``."""
    k = wp.k
    xq, wq, left, lam = _axial_rule(_grid(modes).nodes, profile, k, theta_star)
    f, fd = profile.f(xq), profile.f_dot(xq)
    z = k * theta_star * f
    base = wq * np.exp(0.5j * k * xq * theta_star ** 2) * f
    out = {}
    for m, members in _paired(modes):
        br = 1j * theta_star * special.jvp(m, z) - fd * special.jv(m, z)
        for n, fld in members:
            # J_{-m} = (-1)^m J_m, so (-i)^n J_n = (-i)^m J_m for both signs
            out[n] = complex(np.pi * (-1j) ** m * np.sum(base * br * _interp(fld.values, left, lam)))
    return out


def directivity_series(U, profile: Profile, wp: WaveParams, theta_star: float,
                       phi_star: float) -> complex:
    """Modal Bessel series for ``T``.

    ``T = pi sum_n (-i)^n e^{i n phi*} int [i theta* J_n'(k theta* f) - f' J_n(k theta* f)]
    exp(ik x theta*^2 / 2) U_n f dx``.
    """
    _check_compact(profile)
    terms = _series_terms(_as_modes(U), profile, wp, theta_star)
    return complex(sum(t * np.exp(1j * n * phi_star) for n, t in terms.items()))


def directivity_quadrature(U, profile: Profile, wp: WaveParams, theta_star: float,
                           phi_star: float, tol: float = 1e-12) -> complex:
    """Reference ``T`` by direct quadrature over the surface.

    ``T = (1/2) int int (theta* cos(phi - phi*) - f') exp{ik(-theta* f cos(phi* - phi)
    + x theta*^2/2)} U(x, phi) f dx dphi``, with the periodic trapezoid rule in
    the angle (doubled until converged) and the solver's axial interpolant.
    """
    _check_compact(profile)
    modes = _as_modes(U)
    k = wp.k
    xq, wq, left, lam = _axial_rule(_grid(modes).nodes, profile, k, theta_star)
    f, fd = profile.f(xq), profile.f_dot(xq)
    un = {n: _interp(fl.values, left, lam) for n, fl in modes.items()}
    nmax = max(abs(n) for n in modes)
    zmax = float(np.max(np.abs(k * theta_star * f))) if xq.size else 0.0
    m = 1 << max(4, int(math.ceil(math.log2(2 * (zmax + nmax) + 24))))
    prev = None
    while m <= 1 << 16:
        phi = 2 * np.pi * np.arange(m) / m
        uxp = sum(np.multiply.outer(v, np.exp(1j * n * phi)) for n, v in un.items())
        cs = np.cos(phi - phi_star)[None, :]
        integ = (theta_star * cs - fd[:, None]) * np.exp(
            1j * k * (-theta_star * f[:, None] * cs + 0.5 * xq[:, None] * theta_star ** 2)) \
            * uxp * (f * wq)[:, None]
        val = 0.5 * 2 * np.pi * integ.mean(axis=1).sum()
        scale = 0.5 * 2 * np.pi * np.abs(integ).mean(axis=1).sum()
        if prev is not None and abs(val - prev) <= tol * max(scale, 1e-300):
            return complex(val)
        prev, m = val, 2 * m
    raise AccuracyError("angular quadrature of the directivity did not converge", estimate=prev)


def directivity(U, profile: Profile, wp: WaveParams, theta_star: float,
                phi_star: float = 0.0, check: bool = True,
                tol: float = DIRECTIVITY_TOL) -> Directivity:
    """Diffraction coefficient from the modal series, checked by quadrature.

    Raises
    ------
    ConsistencyError
        If ``check`` is set and the series and the reference quadrature
        differ by more than ``tol`` relative.
    """
    if theta_star < 0:
        raise DomainError("theta_star must be non-negative")
    fast = directivity_series(U, profile, wp, theta_star, phi_star)
    ref = None
    if check:
        ref = directivity_quadrature(U, profile, wp, theta_star, phi_star)
        scale = max(abs(ref), abs(fast))
        if abs(fast - ref) > tol * scale and abs(fast - ref) > 1e-13:
            raise ConsistencyError(
                f"modal series {fast} and quadrature {ref} disagree "
                f"({abs(fast - ref) / scale:.2e} relative)")
    return Directivity(float(theta_star), float(phi_star), fast, ref,
                       {"k_real": wp.k.real, "k_imag": wp.k.imag, "modes": sorted(_as_modes(U))})


def directivity_table(U, profile: Profile, wp: WaveParams, thetas, phis=(0.0,),
                      check: bool = True) -> list:
    """:func:`directivity` over a grid of observation angles."""
    return [directivity(U, profile, wp, float(t), float(p), check=check)
            for p in phis for t in thetas]


# ---------------------------------------------------------- optical theorem


@dataclass(frozen=True)
class OpticalTheoremBalance:
    """Both sides of ``int int |u^sc|^2 r dr dphi = -2 Re T(theta, 0)``.

    ``lhs`` includes ``tail``, the far-field estimate of the plane integral
    beyond ``r_max``.
    """

    lhs: float
    rhs: float
    residual: float
    plane_x: float
    r_max: float
    tail: float
    n_radii: int


def _gl_radii(r_edges, order=8):
    u, w = np.polynomial.legendre.leggauss(order)
    a, b = r_edges[:-1], r_edges[1:]
    r = (0.5 * (a + b))[:, None] + 0.5 * (b - a)[:, None] * u[None, :]
    return r.ravel(), (0.5 * (b - a)[:, None] * w[None, :]).ravel()


def _flux_density(U, profile, wp, plane_x, r):
    """``sum_n |u_n(r)|^2``, the angular mean of ``|u^sc|^2``."""
    parts = reconstruct_modes(U, profile, wp, plane_x, r)
    return sum(np.abs(v) ** 2 for v in parts.values())


def optical_theorem_balance(U, profile: Profile, wp: WaveParams, plane_x: float,
                            decay: float = OT_DECAY, r_step: float | None = None,
                            r_limit: float | None = None) -> OpticalTheoremBalance:
    """Scattered flux through the plane ``x = plane_x`` and the forward amplitude.

    The radial integral uses 8-point Gauss-Legendre panels of width
    ``r_step`` (default: a quarter of the local Fresnel scale of the body's
    far end) and is continued outward until ``|u^sc|^2`` on a whole panel
    stays below ``decay^2`` times its peak. The remainder is estimated from
    the far-field form ``|u^sc|^2 ~ (k / 2 pi L)^2 |T(r / L)|^2`` with ``L``
    measured from the body's mid-point.
    """
    _check_compact(profile)
    if not plane_x > profile.x_end:
        raise DomainError("the plane must lie downstream of the body")
    modes = _as_modes(U)
    k = wp.k.real
    d_min = plane_x - profile.x_end
    fmax = float(np.max(profile.f(profile.sample_points(2001))))
    L = plane_x - 0.5 * (profile.x_start + profile.x_end)
    if r_step is None:
        # phase k r dr / d_min per panel kept near 4 rad at the body radius
        r_step = min(math.sqrt(d_min / k), 4.0 * d_min / (k * max(fmax, 1e-300)))
    if r_limit is None:
        r_limit = 200.0 * (fmax + math.sqrt(L / k)) + 4.0 * L / max(k * fmax, 1e-300)
    lhs, peak, r0, n_r = 0.0, 0.0, 0.0, 0
    quiet = 0
    block = 16
    while r0 < r_limit:
        edges = r0 + r_step * np.arange(block + 1)
        r, w = _gl_radii(edges)
        dens = _flux_density(modes, profile, wp, plane_x, r)
        lhs += float(np.sum(w * dens * r)) * 2 * np.pi
        n_r += r.size
        top = float(np.max(dens))
        peak = max(peak, top)
        quiet = quiet + 1 if top <= decay ** 2 * peak else 0
        r0 = edges[-1]
        if quiet >= 2:
            break
    else:
        raise AccuracyError("scattered field did not decay inside the radial limit", estimate=lhs)
    tail = _far_tail(modes, profile, wp, r0 / L, L)
    rhs = -2.0 * directivity(modes, profile, wp, wp.theta, 0.0, check=False).value.real
    lhs_t = lhs + tail
    den = max(abs(lhs_t), abs(rhs))
    res = 0.0 if den == 0 else abs(lhs_t - rhs) / den
    return OpticalTheoremBalance(lhs_t, rhs, res, float(plane_x), float(r0), tail, n_r)


def _far_tail(modes, profile, wp, theta0, L, n_theta=64):
    """``(k/2pi)^2 int_{theta0}^{inf} int |T|^2 theta dtheta dphi`` via a power-law tail."""
    k = wp.k.real
    th = theta0 * np.geomspace(1.0, 4.0, n_theta)
    # angular mean of |T|^2 is sum_n |t_n|^2
    tv = np.array([sum(abs(v) ** 2 for v in _series_terms(modes, profile, wp, t).values())
                   for t in th])
    dens = (k / (2 * np.pi)) ** 2 * 2 * np.pi * tv * th
    part = float(np.trapezoid(dens, th))
    # beyond 4 theta0 assume dens ~ theta^-p fitted on the last octave
    sel = th >= 2 * theta0
    good = dens[sel] > 0
    if np.count_nonzero(good) >= 4:
        p = -np.polyfit(np.log(th[sel][good]), np.log(dens[sel][good]), 1)[0]
        if p > 1.05:
            part += float(dens[-1] * th[-1] / (p - 1))
    return part


def optical_theorem_residual(U, profile: Profile, wp: WaveParams, plane_x: float,
                             **kw) -> float:
    """Relative mismatch ``|LHS - RHS| / max(|LHS|, |RHS|)`` (0 when both vanish).

    See :func:`optical_theorem_balance` for the details and keyword options.
    """
    return optical_theorem_balance(U, profile, wp, plane_x, **kw).residual
