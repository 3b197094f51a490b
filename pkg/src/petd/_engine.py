"""Compiled product-integration engine for the modal boundary kernel.

The modal kernel of a body of revolution, written with d = x* - x,
c = k r* f / d and the reference radius F = f(x*) (polynomial extension),

    K_n = (i k f / d^2) (-i)^n exp(ik (r*^2 + f^2) / (2d)) [A J_n(c) + B J_n'(c)],
    A = f + d f',  B = -i r*,

is split with J = (H1 + H2)/2 into a fast part carrying
exp(i w_f t), w_f = k (r* + F)^2 / 2, and a slow part carrying
exp(i w_s t), w_s = k (r* - F)^2 / 2, where t = 1/d. Both remaining
amplitudes are smooth in t. Panels far from the diagonal use Gauss-Legendre
in x on the full kernel; near the diagonal the fast and slow parts are
integrated with Filon-Legendre rules in t, and the weakly singular slow
part of the diagonal panel with the substitution d = s^2.

Weights are accumulated against piecewise-linear hat functions, giving the
product trapezoid rule for the Volterra operator.
"""

import math

import numba as nb
import numpy as np

from ._bessel_nb import Z_SERIES, hankel_combo, j_series

NQ_GL = 8
NQ_FILON = 10
NQ_SING = 12
PHI_GL = 6.0  # largest phase change of a panel integrated in x
PHI_SUB = 3.0  # phase per Gauss-Legendre sub-interval
T_RATIO = 1.5  # geometric growth of Filon pieces in t
DAMP_CUT = 46.0  # exp(-46) ~ 1e-20 counts as negligible
DC_FULL = 1.0  # Bessel argument change per Filon piece in full mode
MAX_PIECES = 4000

_u3, _w3 = np.polynomial.legendre.leggauss(3)
_u5, _w5 = np.polynomial.legendre.leggauss(5)
_u8, _w8 = np.polynomial.legendre.leggauss(NQ_GL)
_u10, _w10 = np.polynomial.legendre.leggauss(NQ_FILON)
_u12, _w12 = np.polynomial.legendre.leggauss(NQ_SING)


def _filon_matrix(u, w):
    q = u.size
    m = np.empty((q, q))
    for ell in range(q):
        c = np.zeros(ell + 1)
        c[-1] = 1.0
        m[ell] = (2 * ell + 1) * w * np.polynomial.legendre.legval(u, c)
    return m


_M10 = _filon_matrix(_u10, _w10)
GL3 = (_u3, _w3)
GL5 = (_u5, _w5)
GL8 = (_u8, _w8)
GL12 = (_u12, _w12)
FILON10 = (_u10, _w10, _M10)


# ---------------------------------------------------------------- polynomials


@nb.njit(cache=True)
def poly_eval(coeffs, x):
    s = 0.0
    for i in range(coeffs.size - 1, -1, -1):
        s = s * x + coeffs[i]
    return s


@nb.njit(cache=True)
def poly_deriv(coeffs, x):
    s = 0.0
    for i in range(coeffs.size - 1, 0, -1):
        s = s * x + i * coeffs[i]
    return s


@nb.njit(cache=True)
def taylor_parts(coeffs, x, d, work):
    """f(x), f'(x), D1, D2 for the polynomial profile.

    With F = f(x + d): F - f = d*D1 and f + d f' - F = -d^2*D2, both free of
    cancellation.
    """
    deg = coeffs.size - 1
    # Taylor coefficients t_m = f^(m)(x)/m! by synthetic division
    t = work
    for i in range(deg + 1):
        t[i] = coeffs[i]
    for j in range(deg):
        for i in range(deg - 1, j - 1, -1):
            t[i] += x * t[i + 1]
    f = t[0]
    fd = t[1] if deg >= 1 else 0.0
    d1 = 0.0
    for m in range(deg, 0, -1):
        d1 = d1 * d + t[m]
    d2 = 0.0
    for m in range(deg, 1, -1):
        d2 = d2 * d + t[m]
    return f, fd, d1, d2


# ------------------------------------------------------------------- kernels


@nb.njit(cache=True)
def _mi_pow(n):
    r = n % 4
    if r == 0:
        return 1.0 + 0j
    if r == 1:
        return -1j
    if r == 2:
        return -1.0 + 0j
    return 1j


@nb.njit(cache=True)
def kernel_parts(n, k, rs, F, f, fd, d1, d2, d, h1, h2):
    """Fast and slow amplitudes (residual exponentials included).

    Returns (a_f, a_s) with K_n = a_f exp(i w_f / d) + a_s exp(i w_s / d).
    """
    if f == 0.0:
        return 0j, 0j
    c = k * rs * f / d
    combo = hankel_combo(n, c, h1, h2)
    if n == 0:
        h1d = -h1[1]
    else:
        h1d = h1[n - 1] - (n / c) * h1[n]
        combo = combo - (n / c) * h2[n]
    a = f + d * fd
    pref = 0.5j * k * f / (d * d) * _mi_pow(n)
    fast = pref * (a * h1[n] - 1j * rs * h1d)
    slow = pref * ((F - rs - d * d * d2) * h2[n] - 1j * rs * combo)
    ef = -0.5j * k * d1 * (2.0 * rs + f + F)
    es = 0.5j * k * d1 * (2.0 * rs - f - F)
    return fast * np.exp(ef), slow * np.exp(es)


@nb.njit(cache=True)
def kernel_full_amp(n, k, rs, F, f, fd, d1, d, c):
    """Full kernel amplitude for small |c|, residual to exp(i w_e / d).

    w_e = k (r*^2 + F^2)/2.
    """
    if f == 0.0:
        return 0j
    jn = j_series(n, c)
    if n == 0:
        jd = -j_series(1, c)
    elif c == 0:
        jd = 0.5 + 0j if n == 1 else 0j
    else:
        jd = j_series(n - 1, c) - (n / c) * jn
    a = f + d * fd
    pref = 1j * k * f / (d * d) * _mi_pow(n)
    ee = -0.5j * k * d1 * (f + F)
    return pref * (a * jn - 1j * rs * jd) * np.exp(ee)


@nb.njit(cache=True)
def kernel_value(n, k, rs, F, x, d, coeffs, h1, h2, tw):
    """Complete modal kernel K_n(x*, x) at x = x* - d."""
    f, fd, d1, d2 = taylor_parts(coeffs, x, d, tw)
    c = k * rs * f / d
    if abs(c) < Z_SERIES:
        we = 0.5 * k * (rs * rs + F * F)
        return kernel_full_amp(n, k, rs, F, f, fd, d1, d, c) * np.exp(1j * we / d)
    af, as_ = kernel_parts(n, k, rs, F, f, fd, d1, d2, d, h1, h2)
    wf = 0.5 * k * (rs + F) ** 2
    ws = 0.5 * k * (rs - F) ** 2
    return af * np.exp(1j * wf / d) + as_ * np.exp(1j * ws / d)


# ------------------------------------------------------------ Filon weights


@nb.njit(cache=True)
def sph_jn_all(z, out):
    """Spherical Bessel j_l(z), l = 0..len(out)-1, complex z."""
    nl = out.size
    az = abs(z)
    if az < 1.0:
        q = -0.5 * z * z
        lead = 1.0 + 0j
        for ell in range(nl):
            if ell > 0:
                lead = lead * z / (2 * ell + 1)
            term = 1.0 + 0j
            s = term
            for kk in range(1, 40):
                term = term * q / (kk * (2 * ell + 2 * kk + 1))
                s += term
                if abs(term) < 1e-18 * abs(s):
                    break
            out[ell] = lead * s
        return
    s0 = np.sin(z) / z
    if az >= nl:
        out[0] = s0
        if nl > 1:
            out[1] = s0 / z - np.cos(z) / z
        for ell in range(1, nl - 1):
            out[ell + 1] = (2 * ell + 1) / z * out[ell] - out[ell - 1]
        return
    top = nl + 20 + int(az)
    jp = 0j
    jc = 1e-30 + 0j
    for ell in range(top, 0, -1):
        jm = (2 * ell + 1) / z * jc - jp
        if ell - 1 < nl:
            out[ell - 1] = jm
        jp = jc
        jc = jm
        if abs(jc) > 1e250:
            jp *= 1e-250
            jc *= 1e-250
            for i in range(nl):
                out[i] *= 1e-250
    s1 = s0 / z - np.cos(z) / z
    if abs(s0) >= abs(s1) or nl == 1:
        scale = s0 / out[0]
    else:
        scale = s1 / out[1]
    for i in range(nl):
        out[i] *= scale


@nb.njit(cache=True)
def filon_weights(ta, tb, w, mat, jl, out):
    """Weights W_q with sum_q W_q A(t_q) ~ int_ta^tb A(t) exp(i w t) dt."""
    half = 0.5 * (tb - ta)
    tc = 0.5 * (ta + tb)
    om = w * half
    sph_jn_all(om, jl)
    nq = out.size
    ipow = 1.0 + 0j
    for q in range(nq):
        out[q] = 0j
    for ell in range(nq):
        coef = ipow * jl[ell]
        for q in range(nq):
            out[q] += coef * mat[ell, q]
        ipow *= 1j
    ph = half * np.exp(1j * w * tc)
    for q in range(nq):
        out[q] *= ph


# --------------------------------------------------------------- row weights


@nb.njit(cache=True)
def _accumulate(out, m, a, b, x, d_right, val):
    """Spread val over hats of nodes m (at a) and m+1 (at b)."""
    hw = b - a
    wr = (x - a) / hw
    wl = d_right / hw
    out[m] += val * wl
    out[m + 1] += val * wr


@nb.njit(cache=True)
def _panel_gl(n, k, rs, F, xs, a, b, hi, m, coeffs, nsub, u, wq, h1, h2, tw, out):
    """Gauss-Legendre in x over [a, hi] (hi <= b) on the full kernel."""
    step = (hi - a) / nsub
    for s in range(nsub):
        lo = a + s * step
        for q in range(u.size):
            x = lo + 0.5 * step * (u[q] + 1.0)
            d = xs - x
            kv = kernel_value(n, k, rs, F, x, d, coeffs, h1, h2, tw)
            _accumulate(out, m, a, b, x, b - x, 0.5 * step * wq[q] * kv)


@nb.njit(cache=True)
def _t_pieces(ta, tb, ratio, buf):
    """Geometric split of [ta, tb] (ta > 0); returns the piece count."""
    npc = 0
    lo = ta
    while lo < tb and npc < buf.size - 1:
        hi = min(lo * ratio, tb)
        if tb - hi < 1e-9 * tb:
            hi = tb
        buf[npc] = lo
        npc += 1
        lo = hi
    buf[npc] = tb
    return npc


@nb.njit(cache=True)
def _filon_split(n, k, rs, F, xs, a, b, m, coeffs, ta, tb, use_fast, use_slow,
                 u, mat, jl, wf_buf, ws_buf, h1, h2, tw, out):
    """Filon in t over [ta, tb] for the split kernel parts."""
    wf = 0.5 * k * (rs + F) ** 2
    ws = 0.5 * k * (rs - F) ** 2
    filon_weights(ta, tb, wf, mat, jl, wf_buf)
    filon_weights(ta, tb, ws, mat, jl, ws_buf)
    half = 0.5 * (tb - ta)
    tc = 0.5 * (ta + tb)
    for q in range(u.size):
        t = tc + half * u[q]
        d = 1.0 / t
        x = xs - d
        f, fd, d1, d2 = taylor_parts(coeffs, x, d, tw)
        af, as_ = kernel_parts(n, k, rs, F, f, fd, d1, d2, d, h1, h2)
        val = 0j
        if use_fast:
            val += wf_buf[q] * af
        if use_slow:
            val += ws_buf[q] * as_
        # dx = dt / t^2
        _accumulate(out, m, a, b, x, (b - xs) + d, val * d * d)


@nb.njit(cache=True)
def _filon_full(n, k, rs, F, xs, a, b, m, coeffs, ta, tb, u, mat, jl, w_buf,
                tw, out):
    """Filon in t over [ta, tb] for the unsplit kernel (small |c|)."""
    we = 0.5 * k * (rs * rs + F * F)
    filon_weights(ta, tb, we, mat, jl, w_buf)
    half = 0.5 * (tb - ta)
    tc = 0.5 * (ta + tb)
    for q in range(u.size):
        t = tc + half * u[q]
        d = 1.0 / t
        x = xs - d
        f, fd, d1, d2 = taylor_parts(coeffs, x, d, tw)
        c = k * rs * f / d
        amp = kernel_full_amp(n, k, rs, F, f, fd, d1, d, c)
        _accumulate(out, m, a, b, x, (b - xs) + d, w_buf[q] * amp * d * d)


@nb.njit(cache=True)
def _sing_slow(n, k, rs, F, xs, a, b, m, coeffs, s_hi, u, wq, h1, h2, tw, out):
    """Slow part on the diagonal panel with d = s^2, s in [0, s_hi]."""
    cuts = (0.0, 0.25 * s_hi, s_hi)
    for p in range(2):
        lo = cuts[p]
        hi = cuts[p + 1]
        half = 0.5 * (hi - lo)
        for q in range(u.size):
            s = lo + half * (u[q] + 1.0)
            d = s * s
            x = xs - d
            f, fd, d1, d2 = taylor_parts(coeffs, x, d, tw)
            af, as_ = kernel_parts(n, k, rs, F, f, fd, d1, d2, d, h1, h2)
            ws = 0.5 * k * (rs - F) ** 2
            val = as_ * np.exp(1j * ws / d) * 2.0 * s * half * wq[q]
            _accumulate(out, m, a, b, x, d, val)


@nb.njit(cache=True)
def _phase_change(k, rs, coeffs, xs, a, hi, sign):
    """Phase change and minimum damping of exp(ik (r* +- f)^2 / (2d))."""
    pa = (rs + sign * poly_eval(coeffs, a)) ** 2 / (2.0 * (xs - a))
    pb = (rs + sign * poly_eval(coeffs, hi)) ** 2 / (2.0 * (xs - hi))
    xm = 0.5 * (a + hi)
    pm = (rs + sign * poly_eval(coeffs, xm)) ** 2 / (2.0 * (xs - xm))
    phi = k.real * (abs(pm - pa) + abs(pb - pm))
    damp = k.imag * min(pa, pb, pm)
    return phi, damp


@nb.njit(cache=True)
def row_weights(n, k, xs, rs, nodes, coeffs, out):
    """Product-trapezoid weights of int_{nodes[0]}^{xs} K_n(xs, x) U(x) dx.

    ``out[j]`` receives the weight of U(nodes[j]). Nodes beyond ``xs`` get
    no weight except the right hat of a panel straddling ``xs``.
    """
    for i in range(out.size):
        out[i] = 0j
    nn = nodes.size
    if nn < 2 or xs <= nodes[0]:
        return
    F = poly_eval(coeffs, xs)
    h1 = np.empty(n + 3, np.complex128)
    h2 = np.empty(n + 3, np.complex128)
    u3, w3 = GL3
    u5, w5 = GL5
    u8, w8 = GL8
    u10, w10, mat = FILON10
    u12, w12 = GL12
    jl = np.empty(NQ_FILON, np.complex128)
    wf_buf = np.empty(NQ_FILON, np.complex128)
    ws_buf = np.empty(NQ_FILON, np.complex128)
    buf = np.empty(MAX_PIECES + 1)
    tw = np.empty(coeffs.size)
    wf = 0.5 * k * (rs + F) ** 2
    ws = 0.5 * k * (rs - F) ** 2
    on_surface = abs(rs - F) <= 1e-13 * max(abs(F), 1e-300)
    for m in range(nn - 1):
        a = nodes[m]
        b = nodes[m + 1]
        if a >= xs:
            break
        hi = min(b, xs)
        diag = hi >= xs
        if not diag:
            phi_f, damp_f = _phase_change(k, rs, coeffs, xs, a, hi, 1.0)
            phi_s, damp_s = _phase_change(k, rs, coeffs, xs, a, hi, -1.0)
            if damp_s > DAMP_CUT:
                continue
            if phi_f <= PHI_GL:
                # low orders only where both phase and amplitude are smooth
                far = (xs - hi) > 8.0 * (hi - a)
                if far and phi_f <= 0.3:
                    _panel_gl(n, k, rs, F, xs, a, b, hi, m, coeffs, 1, u3, w3,
                              h1, h2, tw, out)
                elif far and phi_f <= 1.2:
                    _panel_gl(n, k, rs, F, xs, a, b, hi, m, coeffs, 1, u5, w5,
                              h1, h2, tw, out)
                else:
                    nsub = max(1, int(math.ceil(phi_f / PHI_SUB)))
                    _panel_gl(n, k, rs, F, xs, a, b, hi, m, coeffs, nsub, u8,
                              w8, h1, h2, tw, out)
                continue
            ta = 1.0 / (xs - a)
            tb = 1.0 / (xs - hi)
            ca = abs(k * rs * poly_eval(coeffs, a) * ta)
            cb = abs(k * rs * poly_eval(coeffs, hi) * tb)
            if max(ca, cb) < Z_SERIES:
                _full_pieces(n, k, rs, F, xs, a, b, m, coeffs, ta, tb, u10,
                             mat, jl, wf_buf, tw, out)
                continue
            npc = _t_pieces(ta, tb, T_RATIO, buf)
            use_fast = damp_f <= DAMP_CUT
            for p in range(npc):
                _filon_split(n, k, rs, F, xs, a, b, m, coeffs, buf[p],
                             buf[p + 1], use_fast, True, u10, mat, jl, wf_buf,
                             ws_buf, h1, h2, tw, out)
            continue
        # diagonal panel: upper limit is x* itself
        ta = 1.0 / (xs - a)
        if wf.imag <= 0.0:
            raise ValueError("diagonal panel needs Im k > 0")
        t_end = max(DAMP_CUT / wf.imag, ta * T_RATIO)
        npc = _t_pieces(ta, t_end, T_RATIO, buf)
        for p in range(npc):
            _filon_split(n, k, rs, F, xs, a, b, m, coeffs, buf[p], buf[p + 1],
                         True, False, u10, mat, jl, wf_buf, ws_buf, h1, h2, tw, out)
        if on_surface:
            _sing_slow(n, k, rs, F, xs, a, b, m, coeffs, math.sqrt(xs - a),
                       u12, w12, h1, h2, tw, out)
        else:
            if ws.imag <= 0.0:
                raise ValueError("diagonal panel needs Im k > 0")
            t_end = max(DAMP_CUT / ws.imag, ta * T_RATIO)
            npc = _t_pieces(ta, t_end, T_RATIO, buf)
            for p in range(npc):
                _filon_split(n, k, rs, F, xs, a, b, m, coeffs, buf[p],
                             buf[p + 1], False, True, u10, mat, jl, wf_buf,
                             ws_buf, h1, h2, tw, out)


@nb.njit(cache=True)
def _full_pieces(n, k, rs, F, xs, a, b, m, coeffs, ta, tb, u, mat, jl, w_buf,
                 tw, out):
    """Filon pieces for the unsplit kernel, limiting growth of t and of c."""
    lo = ta
    count = 0
    while lo < tb and count < MAX_PIECES:
        hi = min(lo * T_RATIO, tb)
        # c grows roughly linearly in t; cap its change per piece
        c_lo = abs(k * rs * poly_eval(coeffs, xs - 1.0 / lo)) * lo
        c_hi = abs(k * rs * poly_eval(coeffs, xs - 1.0 / hi)) * hi
        if c_hi - c_lo > DC_FULL:
            hi = lo + (hi - lo) * DC_FULL / (c_hi - c_lo)
        if tb - hi < 1e-9 * tb:
            hi = tb
        _filon_full(n, k, rs, F, xs, a, b, m, coeffs, lo, hi, u, mat, jl,
                    w_buf, tw, out)
        lo = hi
        count += 1


@nb.njit(cache=True)
def weight_matrix(n, k, nodes, coeffs, rows_from):
    """Lower-triangular surface weight matrix W[j, m] (rows >= rows_from)."""
    nn = nodes.size
    w = np.zeros((nn, nn), np.complex128)
    row = np.empty(nn, np.complex128)
    for j in range(max(rows_from, 1), nn):
        xs = nodes[j]
        rs = poly_eval(coeffs, xs)
        row_weights(n, k, xs, rs, nodes[: j + 1], coeffs, row[: j + 1])
        for i in range(j + 1):
            w[j, i] = row[i]
    return w


@nb.njit(cache=True)
def kernel_grid(n, k, coeffs, xs, rs, x):
    """K_n at pairs (xs[i], x[i]) with observation radius rs[i]."""
    out = np.empty(x.size, np.complex128)
    tw = np.empty(coeffs.size)
    h1 = np.empty(n + 3, np.complex128)
    h2 = np.empty(n + 3, np.complex128)
    for i in range(x.size):
        F = poly_eval(coeffs, xs[i])
        d = xs[i] - x[i]
        out[i] = kernel_value(n, k, rs[i], F, x[i], d, coeffs, h1, h2, tw)
    return out


@nb.njit(cache=True)
def kernel_parts_grid(n, k, coeffs, xs, rs, x):
    """Fast and slow parts (with their exponentials) at pairs (testing)."""
    fa = np.empty(x.size, np.complex128)
    sa = np.empty(x.size, np.complex128)
    tw = np.empty(coeffs.size)
    h1 = np.empty(n + 3, np.complex128)
    h2 = np.empty(n + 3, np.complex128)
    for i in range(x.size):
        F = poly_eval(coeffs, xs[i])
        d = xs[i] - x[i]
        f, fd, d1, d2 = taylor_parts(coeffs, x[i], d, tw)
        af, as_ = kernel_parts(n, k, rs[i], F, f, fd, d1, d2, d, h1, h2)
        wf = 0.5 * k * (rs[i] + F) ** 2
        ws = 0.5 * k * (rs[i] - F) ** 2
        fa[i] = af * np.exp(1j * wf / d)
        sa[i] = as_ * np.exp(1j * ws / d)
    return fa, sa
