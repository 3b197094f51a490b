"""Marching and iterative solution of the modal surface equations.

Each angular mode obeys a Volterra equation of the second kind

    U_n(x*) = int_{X1}^{x*} K_n(x*, x) U_n(x) dx + 2 U^in_n(x*).

The unknown is interpolated linearly between nodes (product trapezoid
rule); the kernel itself is integrated against the hat functions by the
compiled engine, so the oscillation and the diagonal singularity of K_n do
not limit the node spacing. The resulting lower-triangular system is solved
by forward substitution.

Tip nodes
---------
At a tip (``f(X1) = 0``) the integral over ``[X1, x*]`` does not vanish as
``x* -> X1``: the modal kernel becomes self-similar and

    int K_n dx -> C_n = int_0^inf i (-i)^n e^{iv} [J_n(v) - i J_n'(v)] dv,

which equals -1 for n = 0 and 0 otherwise (Abel limit of the Laplace
transform of J_n). The tip value is therefore ``2 U^in / (1 - C_n)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

from . import _engine
from .errors import AccuracyError, AccuracyWarning, DivergenceError, DomainError, NumericError
from .geometry import Profile, WaveParams
from .kernels import KernelEvaluator, kernel_modal_closed

TWO_GRID_TOL = 2e-2


@dataclass(frozen=True)
class AxialGrid:
    """Strictly increasing axial nodes within a profile's support.

    ``spacing`` records the rule used to build the nodes: ``"x"`` for uniform
    steps in x, ``"y"`` for uniform steps in ``y = Re(k) alpha^2 x``, or
    ``"custom"``.
    """

    nodes: np.ndarray
    spacing: str = "custom"
    y_scale: float | None = None

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        if x.ndim != 1 or x.size < 2 or not np.all(np.diff(x) > 0):
            raise DomainError("grid nodes must be a strictly increasing 1-D array")
        object.__setattr__(self, "nodes", x)

    @classmethod
    def uniform_x(cls, x0: float, x1: float, n: int) -> "AxialGrid":
        return cls(np.linspace(x0, x1, n), "x")

    @classmethod
    def uniform_y(cls, y0: float, y1: float, n: int, k_real: float, alpha: float) -> "AxialGrid":
        """Uniform in the self-similar variable; ``x = y / (k alpha^2)``."""
        s = k_real * alpha * alpha
        return cls(np.linspace(y0, y1, n) / s, "y", s)

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def y(self) -> np.ndarray | None:
        return None if self.y_scale is None else self.nodes * self.y_scale

    def coarsened(self) -> "AxialGrid":
        """Every second node, keeping both ends when the count is odd."""
        return AxialGrid(self.nodes[::2], self.spacing, self.y_scale)

    def check_support(self, profile: Profile):
        if self.nodes[0] < profile.x_start - 1e-12 or self.nodes[-1] > profile.x_end + 1e-12:
            raise DomainError("grid extends outside the profile support")


@dataclass
class ModalSurfaceField:
    """Total surface field of one angular mode on an axial grid."""

    mode: int
    grid: AxialGrid
    values: np.ndarray
    incident: np.ndarray | None = None
    meta: dict = field(default_factory=dict)
    error_estimate: float | None = None

    @property
    def scattered(self) -> np.ndarray:
        """``U^sc = U - U^in`` (requires the incident samples)."""
        if self.incident is None:
            raise ValueError("incident samples were not stored")
        return self.values - self.incident

    def interpolate(self, x) -> np.ndarray:
        """Piecewise-linear interpolation consistent with the discretisation."""
        xr = self.grid.nodes
        return np.interp(x, xr, self.values.real) + 1j * np.interp(x, xr, self.values.imag)


@dataclass
class IterationTrace:
    """Terms of the iteration series and the relative size of each term."""

    terms: list
    residual_norms: list
    start: str = "doubled"

    def partial_sums(self) -> list:
        out, s = [], np.zeros_like(self.terms[0])
        for t in self.terms:
            s = s + t
            out.append(s.copy())
        return out


# ------------------------------------------------------------- incidence


def incident_modal(wp: WaveParams, profile: Profile, n: int, x, method: str = "fast"):
    """Angular Fourier coefficient ``U^in_n(x)`` of the incident wave on the surface.

    ``method="fast"`` uses the Jacobi-Anger value
    ``i^n J_n(k theta f(x)) exp(-i k x theta^2 / 2)``; ``method="quadrature"``
    integrates ``exp{ik(theta f cos phi - x theta^2/2)}`` over the angle with
    a converged periodic trapezoid rule.
    """
    k, th = wp.k, wp.theta
    xa = np.asarray(x, dtype=float)
    z = k * th * profile.f(xa)
    ph = np.exp(-0.5j * k * xa * th * th)
    if method == "fast":
        out = (1j) ** n * special.jv(n, z) * ph
    elif method == "quadrature":
        m = 1 << max(5, int(math.ceil(math.log2(2 * np.max(np.abs(z)) + abs(n) + 40))))
        prev = None
        while True:
            phi = 2 * np.pi * np.arange(m) / m
            vals = np.exp(1j * np.multiply.outer(z, np.cos(phi)) - 1j * n * phi)
            cur = vals.mean(axis=-1) * ph
            if prev is not None and np.max(np.abs(cur - prev)) <= 1e-14 * max(1.0, np.max(np.abs(cur))):
                out = cur
                break
            prev, m = cur, 2 * m
            if m > 1 << 20:
                raise AccuracyError("angular quadrature of the incident wave failed")
    else:
        raise ValueError(f"unknown method {method!r}")
    return complex(out) if np.ndim(x) == 0 else out


def tip_constant(n: int, eps: float = 0.0) -> complex:
    """Limit ``C_n`` of the kernel integral at a tip.

    With ``eps > 0`` the Abel-damped value
    ``int i(-i)^n e^{(i-eps)v}[J_n - iJ_n'] dv`` is returned in closed form
    from the Laplace transform of J_n; ``eps -> 0`` gives -1 for n = 0 and 0
    otherwise.
    """
    n = abs(n)
    if eps == 0.0:
        return -1.0 + 0j if n == 0 else 0j
    p = eps - 1j
    s = np.sqrt(p * p + 1)
    lap = (s - p) ** n / s
    return complex(1j * (-1j) ** n * ((1 - 1j * p) * lap + (1j if n == 0 else 0)))


# ---------------------------------------------------------------- weights


_GL8 = np.polynomial.legendre.leggauss(8)


def generic_weight_matrix(kernel: Callable, nodes: np.ndarray) -> np.ndarray:
    """Product-trapezoid weights for a smooth user kernel ``kernel(x*, x)``.

    Each panel is integrated with 8-point Gauss-Legendre against the two hat
    functions; the kernel must be finite up to the diagonal.
    """
    u, w = _GL8
    nn = nodes.size
    W = np.zeros((nn, nn), complex)
    for j in range(1, nn):
        xs = nodes[j]
        a, b = nodes[:j], nodes[1:j + 1]
        h = b - a
        x = 0.5 * (a + b)[:, None] + 0.5 * h[:, None] * u[None, :]
        kv = np.asarray(kernel(np.full(x.shape, xs), x), complex)
        lam = (x - a[:, None]) / h[:, None]
        wt = 0.5 * h[:, None] * w[None, :] * kv
        W[j, :j] += np.sum(wt * (1 - lam), axis=1)
        W[j, 1:j + 1] += np.sum(wt * lam, axis=1)
    return W


def _rear_tip_row(kernel: KernelEvaluator, nodes: np.ndarray) -> np.ndarray:
    """Weights of a row whose observation node closes the body (``f(x*) = 0``).

    There the modal kernel is bounded and smooth up to the diagonal (it
    vanishes for ``n != 0``), so panels are integrated with Gauss-Legendre,
    subdivided to keep the phase ``k f^2 / (2d)`` resolved.
    """
    u, w = _GL8
    xs = nodes[-1]
    k = abs(kernel.wp.k)
    row = np.zeros(nodes.size, complex)
    for m in range(nodes.size - 1):
        a, b = nodes[m], nodes[m + 1]
        pts = np.linspace(a, b, 9)
        ph = k * kernel.profile.f(pts) ** 2 / (2 * np.maximum(xs - pts, 1e-300))
        ph[-1] = 0.0 if b == xs else ph[-1]
        nsub = max(1, int(math.ceil(np.ptp(ph) / 2.0)))
        edges = np.linspace(a, b, nsub + 1)
        lo, hi = edges[:-1, None], edges[1:, None]
        xq = (0.5 * (lo + hi) + 0.5 * (hi - lo) * u[None, :]).ravel()
        wq = (0.5 * (hi - lo) * w[None, :]).ravel()
        kv = kernel_modal_closed(kernel, np.full(xq.shape, xs), xq) * wq
        lam = (xq - a) / (b - a)
        row[m] += np.sum(kv * (1 - lam))
        row[m + 1] += np.sum(kv * lam)
    return row


def surface_weights(kernel, grid: AxialGrid) -> np.ndarray:
    """Lower-triangular matrix W with ``int K U dx ~ W @ U`` at every node.

    Tip rows (``f = 0`` at the first node) get ``W[0, 0] = C_n``; rows at a
    closing end of the body (``f = 0`` at a later node) use
    :func:`_rear_tip_row`.
    """
    x = grid.nodes
    if isinstance(kernel, KernelEvaluator):
        if kernel.mode is None:
            raise DomainError("marching needs a modal kernel")
        if kernel.wp.k.imag <= 0:
            raise DomainError("the diagonal quadrature needs Im k > 0; "
                              "use eta extrapolation for real k")
        grid.check_support(kernel.profile)
        fx = kernel.profile.f(x)
        rear = [j for j in range(1, x.size) if fx[j] == 0.0]
        last = rear[0] if rear else x.size
        W = np.zeros((x.size, x.size), complex)
        W[:last, :last] = _engine.weight_matrix(abs(kernel.mode), kernel.wp.k, x[:last],
                                                kernel.coeffs, 1)
        for j in rear:
            W[j, :j + 1] = _rear_tip_row(kernel, x[:j + 1])
        if fx[0] == 0.0:
            W[0, 0] = tip_constant(kernel.mode)
    else:
        W = generic_weight_matrix(kernel, x)
    if not np.all(np.isfinite(W)):
        raise NumericError("non-finite kernel weights")
    return W


def _forward(W, rhs):
    """Forward substitution for ``(I - W) U = rhs`` (row order preserved)."""
    n = rhs.size
    U = np.zeros(n, complex)
    for j in range(n):
        U[j] = (rhs[j] + W[j, :j] @ U[:j]) / (1.0 - W[j, j])
    return U


def _rhs_values(rhs, grid):
    if callable(rhs):
        return np.asarray(rhs(grid.nodes), complex)
    r = np.asarray(rhs, complex)
    if r.shape != grid.nodes.shape:
        raise DomainError("rhs must have one value per grid node")
    return r


def _meta(kernel, grid, extra=None):
    m = {"nodes": int(grid.size), "spacing": grid.spacing}
    if isinstance(kernel, KernelEvaluator):
        m.update(k_real=kernel.wp.k.real, k_imag=kernel.wp.k.imag, eta=kernel.wp.eta,
                 theta=kernel.wp.theta, mode=kernel.mode, profile=kernel.profile.name,
                 **{f"profile_{a}": b for a, b in kernel.profile.params.items()})
    if extra:
        m.update(extra)
    return m


def solve_marching(kernel, rhs, grid: AxialGrid, two_grid: bool = True,
                   weights: np.ndarray | None = None, incident=None) -> ModalSurfaceField:
    """Solve ``U = int K U + rhs`` by forward substitution.

    Parameters
    ----------
    kernel : KernelEvaluator or callable
        Modal kernel evaluator (compiled weights), or a smooth callable
        ``K(x*, x)`` on arrays.
    rhs : array or callable
        Right-hand side at the nodes, normally ``2 U^in_n``.
    grid : AxialGrid
    two_grid : bool
        Also solve on every second node and attach the Richardson estimate
        ``|U_h - U_2h| / 3`` as ``error_estimate``; an
        :class:`AccuracyWarning` is issued when it exceeds 2e-2 relative.
    weights : array, optional
        Precomputed weight matrix for ``grid``.
    incident : array, optional
        Incident samples stored with the result.
    """
    b = _rhs_values(rhs, grid)
    W = surface_weights(kernel, grid) if weights is None else weights
    U = _forward(W, b)
    if not np.all(np.isfinite(U)):
        raise NumericError("non-finite solution values")
    out = ModalSurfaceField(getattr(kernel, "mode", 0) or 0, grid, U, incident,
                            _meta(kernel, grid))
    if two_grid and grid.size >= 5 and grid.size % 2 == 1:
        cg = grid.coarsened()
        Wc = surface_weights(kernel, cg)
        Uc = _forward(Wc, b[::2])
        est = float(np.max(np.abs(U[::2] - Uc)) / 3.0)
        out.error_estimate = est
        rel = est / max(float(np.max(np.abs(U))), 1e-300)
        if rel > TWO_GRID_TOL:
            warnings.warn(f"two-grid error estimate {rel:.2e} exceeds {TWO_GRID_TOL}; "
                          "refine the grid", AccuracyWarning, stacklevel=2)
    return out


def solve_neumann(kernel, rhs, grid: AxialGrid, max_terms: int = 12, tol: float = 1e-6,
                  start: str = "doubled", weights: np.ndarray | None = None,
                  incident=None) -> tuple[ModalSurfaceField, IterationTrace]:
    """Partial sums of the iteration series ``U = sum_m K^m rhs``.

    ``start="doubled"`` is the plain series ``U^(0) = rhs = 2 U^in``,
    ``U^(m+1) = K U^(m)``. Near a tip ``K`` has spectrum close to -1 (see
    :func:`tip_constant`) and this series does not converge there.
    ``start="incident"`` iterates on ``U - U^in`` instead: the terms are
    ``U^in`` followed by ``K^m (I + K) U^in``. Its partial sums are the means
    of consecutive plain partial sums, which cancels the alternating tip
    component; ``incident`` (or ``rhs / 2``) supplies ``U^in``.

    Stops after ``max_terms`` terms or when the newest term is below ``tol``
    relative to the sum. Raises :class:`DivergenceError` when the term norms
    grow for three consecutive terms.
    """
    b = _rhs_values(rhs, grid)
    W = surface_weights(kernel, grid) if weights is None else weights
    if start == "doubled":
        terms = [b.copy()]
    elif start == "incident":
        uin = 0.5 * b if incident is None else np.asarray(incident, complex)
        terms = [uin, uin + W @ uin]
    else:
        raise ValueError(f"unknown start {start!r}")
    total = sum(terms)
    norms = [float(np.max(np.abs(t)) / max(np.max(np.abs(total)), 1e-300)) for t in terms]
    growth = 0
    while len(terms) < max_terms and norms[-1] >= tol:
        nxt = W @ terms[-1]
        if not np.all(np.isfinite(nxt)):
            raise NumericError("non-finite iteration term")
        terms.append(nxt)
        total = total + nxt
        norms.append(float(np.max(np.abs(nxt)) / max(np.max(np.abs(total)), 1e-300)))
        if np.max(np.abs(nxt)) > np.max(np.abs(terms[-2])):
            growth += 1
            if growth >= 3:
                raise DivergenceError("iteration terms grow for three consecutive steps",
                                      estimate=total, error=float(np.max(np.abs(nxt))))
        else:
            growth = 0
    trace = IterationTrace(terms, norms, start)
    field_ = ModalSurfaceField(getattr(kernel, "mode", 0) or 0, grid, total, incident,
                               _meta(kernel, grid, {"terms": len(terms), "start": start}))
    return field_, trace


# ---------------------------------------------------- eta extrapolation


def extrapolation_weights(etas: Sequence[float]) -> np.ndarray:
    """Weights ``w`` with ``sum w_i p(eta_i) = p(0)`` for polynomials of degree < len(etas)."""
    e = np.asarray(etas, float)
    V = np.vander(e, e.size, increasing=True).T
    rhs = np.zeros(e.size)
    rhs[0] = 1.0
    return np.linalg.solve(V, rhs)


def eta_extrapolate(values: Sequence, etas: Sequence[float]):
    """Richardson extrapolation of results computed at ``Im k = eta Re k`` to eta = 0.

    For ``etas = (1e-3, 2e-3, 4e-3)`` the weights are ``(8/3, -2, 1/3)``.
    """
    w = extrapolation_weights(etas)
    vals = [np.asarray(v.values if isinstance(v, ModalSurfaceField) else v) for v in values]
    return sum(wi * v for wi, v in zip(w, vals))


DEFAULT_ETAS = (1e-3, 2e-3, 4e-3)


def solve_cone_axial(alpha: float, k_real: float, grid: AxialGrid,
                     etas: Sequence[float] = DEFAULT_ETAS, two_grid: bool = False):
    """Axial-incidence cone field, extrapolated to real k.

    Returns ``(U0, runs)`` where ``U0`` holds the extrapolated node values and
    ``runs`` the individual :class:`ModalSurfaceField` results.
    """
    from .geometry import make_cone

    cone = make_cone(alpha)
    runs = []
    for eta in etas:
        ke = KernelEvaluator(cone, WaveParams.from_eta(k_real, eta), 0)
        rhs = 2.0 * np.ones(grid.size, complex)
        runs.append(solve_marching(ke, rhs, grid, two_grid=two_grid,
                                   incident=np.ones(grid.size, complex)))
    return eta_extrapolate(runs, etas), runs


def mode_count(wp: WaveParams, profile: Profile) -> int:
    """Truncation ``n_max = ceil(3 + 2 k theta max f)`` (0 for axial incidence)."""
    if wp.theta == 0:
        return 0
    fmax = float(np.max(profile.f(profile.sample_points(2001))))
    return int(math.ceil(3 + 2 * abs(wp.k) * wp.theta * fmax))


def solve_modes(profile: Profile, wp: WaveParams, grid: AxialGrid,
                n_max: int | None = None, two_grid: bool = False) -> dict:
    """Solve every mode ``|n| <= n_max`` by marching.

    Both the kernel and the incident coefficients are even in n, so each
    pair ``+-n`` is solved once and shared.
    """
    n_max = mode_count(wp, profile) if n_max is None else n_max
    out = {}
    for n in range(n_max + 1):
        uin = incident_modal(wp, profile, n, grid.nodes)
        if not np.any(uin):
            fld = ModalSurfaceField(n, grid, np.zeros(grid.size, complex), uin,
                                    _meta(KernelEvaluator(profile, wp, n), grid))
        else:
            fld = solve_marching(KernelEvaluator(profile, wp, n), 2 * uin, grid,
                                 two_grid=two_grid, incident=uin)
        out[n] = fld
        if n:
            out[-n] = ModalSurfaceField(-n, grid, fld.values, fld.incident, dict(fld.meta, mode=-n),
                                        fld.error_estimate)
    return out
