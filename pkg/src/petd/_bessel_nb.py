"""Compiled Bessel and Hankel functions of complex argument for hot loops.

Integer orders only. Ascending series below ``|z| = 12``, Hankel asymptotic
expansions above it, upward recurrence in the order for Y and H. The Hankel
functions are returned exponentially scaled,

    h1(n, z) = H^(1)_n(z) exp(-iz),   h2(n, z) = H^(2)_n(z) exp(+iz),

so that callers can fold the oscillating factor into their own exponent.
"""

import math

import numba as nb
import numpy as np

Z_SERIES = 12.0
EULER_GAMMA = 0.5772156649015329
_TINY = 1e-300


@nb.njit(cache=True)
def j_series(n, z):
    """J_n(z) by the ascending series; accurate for |z| < ~12."""
    q = -0.25 * z * z
    term = 1.0 + 0j
    for m in range(1, n + 1):
        term = term * (0.5 * z) / m
    s = term
    for k in range(1, 200):
        term = term * q / (k * (n + k))
        s += term
        if abs(term) <= 1e-17 * abs(s):
            break
    return s


@nb.njit(cache=True)
def _jy01_series(z):
    """J0, J1, Y0, Y1 by ascending series (principal branch of log)."""
    q = -0.25 * z * z
    lg = np.log(0.5 * z) + EULER_GAMMA
    # sums over k of q^k/(k!)^2 and q^k/(k!(k+1)!) with harmonic weights
    t0 = 1.0 + 0j
    t1 = 1.0 + 0j
    j0 = t0
    j1 = t1
    hk = 0.0  # H_k
    hk1 = 1.0  # H_{k+1}
    s0 = 0j
    s1 = t1 * (hk + hk1)
    for k in range(1, 200):
        t0 = t0 * q / (k * k)
        t1 = t1 * q / (k * (k + 1))
        hk += 1.0 / k
        hk1 += 1.0 / (k + 1)
        j0 += t0
        j1 += t1
        s0 += t0 * hk
        s1 += t1 * (hk + hk1)
        if abs(t0) <= 1e-17 * abs(j0) and abs(t1) <= 1e-17 * abs(j1) and k > 2:
            break
    j1 = j1 * 0.5 * z
    y0 = (2.0 / math.pi) * (lg * j0 - s0)
    # Y1 = (2/pi) ln(z/2) J1 - 2/(pi z) - (z/2)/pi * sum (psi(k+1)+psi(k+2)) ...
    # with psi(k+1) + psi(k+2) = -2 gamma + H_k + H_{k+1}
    y1 = (2.0 / math.pi) * lg * j1 - 2.0 / (math.pi * z) - (0.5 * z / math.pi) * s1
    return j0, j1, y0, y1


@nb.njit(cache=True)
def _asym_sum(nu, z, sign):
    """Sum_k (sign*i)^k a_k(nu) z^-k of the Hankel expansion, with k >= 0."""
    mu = 4.0 * nu * nu
    a = 1.0 + 0j
    s = a
    unit = 1j * sign
    prev = 1e300
    for k in range(1, 80):
        a = a * (mu - (2 * k - 1) ** 2) / (8.0 * k) * unit / z
        aa = abs(a)
        if aa > prev:
            break
        s += a
        prev = aa
        if aa <= 1e-17 * abs(s):
            break
    return s


@nb.njit(cache=True)
def _asym_diff(nu1, nu0, z, sign):
    """Sum_{k>=1} (sign*i)^k (a_k(nu1) - a_k(nu0)) z^-k without the k=0 term."""
    mu1 = 4.0 * nu1 * nu1
    mu0 = 4.0 * nu0 * nu0
    a1 = 1.0 + 0j
    a0 = 1.0 + 0j
    s = 0j
    unit = 1j * sign
    prev = 1e300
    for k in range(1, 80):
        f = unit / (8.0 * k * z)
        a1 = a1 * (mu1 - (2 * k - 1) ** 2) * f
        a0 = a0 * (mu0 - (2 * k - 1) ** 2) * f
        d = a1 - a0
        ad = abs(d)
        if ad > prev and k > 2:
            break
        s += d
        prev = ad
        if ad <= 1e-17 * abs(s):
            break
    return s


@nb.njit(cache=True)
def z_asym(n):
    """Smallest |z| at which the Hankel expansion is used for order n."""
    return Z_SERIES + max(n * n - 1, 0)


@nb.njit(cache=True)
def _asym01(z, h1, h2):
    """Orders 0 and 1 from one pass over the expansion coefficients.

    The H1 and H2 sums differ only in the sign of the odd terms. Returns the
    scaled H2_{-1} + i H2_0 from the k >= 1 tails, free of cancellation.
    """
    w = 1j / z
    a0 = 1.0 + 0j
    a1 = 1.0 + 0j
    e0 = 0j
    o0 = 0j
    e1 = 0j
    o1 = 0j
    prev = 1e300
    for k in range(1, 80):
        f = w / (8.0 * k)
        a0 = a0 * (-(2 * k - 1) ** 2) * f
        a1 = a1 * (4.0 - (2 * k - 1) ** 2) * f
        mag = abs(a0) + abs(a1)
        if mag > prev:
            break
        prev = mag
        if k % 2 == 0:
            e0 += a0
            e1 += a1
        else:
            o0 += a0
            o1 += a1
        if mag <= 1e-17:
            break
    pre = np.sqrt(2.0 / (math.pi * z))
    c0 = 0.7071067811865476 * (1.0 - 1j)  # exp(-i pi/4)
    c1 = 0.7071067811865476 * (-1.0 - 1j)  # exp(-3i pi/4)
    h1[0] = pre * c0 * (1.0 + e0 + o0)
    h1[1] = pre * c1 * (1.0 + e1 + o1)
    h2[0] = pre * np.conj(c0) * (1.0 + e0 - o0)
    h2[1] = pre * np.conj(c1) * (1.0 + e1 - o1)
    # i pre exp(i theta_n) sum_{k>=1} (-i)^k (a_k(n) - a_k(n-1)) z^-k
    dd = (e0 - o0) - (e1 - o1)
    return 1j * pre * np.conj(c0) * dd, -1j * pre * np.conj(c1) * dd


@nb.njit(cache=True)
def hankel_scaled(nmax, z, h1, h2):
    """Fill h1[m], h2[m] (m = 0..nmax) with scaled Hankel functions."""
    if nmax <= 2 and abs(z) >= Z_SERIES:
        _c0, _c1 = _asym01(z, h1, h2)
        if nmax == 2:
            h1[2] = (2.0 / z) * h1[1] - h1[0]
            h2[2] = (2.0 / z) * h2[1] - h2[0]
        return
    if abs(z) < Z_SERIES:
        j0, j1, y0, y1 = _jy01_series(z)
        em = np.exp(-1j * z)
        ep = np.exp(1j * z)
        h1[0] = (j0 + 1j * y0) * em
        h2[0] = (j0 - 1j * y0) * ep
        if nmax >= 1:
            h1[1] = (j1 + 1j * y1) * em
            h2[1] = (j1 - 1j * y1) * ep
        # Y by upward recurrence (stable), J from its series
        ym = y0
        yc = y1
        for m in range(1, nmax):
            yn = (2.0 * m / z) * yc - ym
            jn = j_series(m + 1, z)
            h1[m + 1] = (jn + 1j * yn) * em
            h2[m + 1] = (jn - 1j * yn) * ep
            ym = yc
            yc = yn
        return
    pre = np.sqrt(2.0 / (math.pi * z))
    top = nmax
    zl = z_asym(nmax)
    if abs(z) < zl:
        top = 1
    for m in range(0, min(top, nmax) + 1):
        th = m * 0.5 * math.pi + 0.25 * math.pi
        h1[m] = pre * np.exp(-1j * th) * _asym_sum(m, z, 1.0)
        h2[m] = pre * np.exp(1j * th) * _asym_sum(m, z, -1.0)
    if top < nmax:
        # the scaling factor is order independent, so the recurrence applies
        for m in range(1, nmax):
            h1[m + 1] = (2.0 * m / z) * h1[m] - h1[m - 1]
            h2[m + 1] = (2.0 * m / z) * h2[m] - h2[m - 1]


@nb.njit(cache=True)
def hankel_combo(n, z, h1, h2):
    """Fill scaled Hankel orders 0..n+1 and return h2_{n-1} + i h2_n."""
    if n <= 1 and abs(z) >= Z_SERIES:
        c0, c1 = _asym01(z, h1, h2)
        if n == 1:
            h1[2] = (2.0 / z) * h1[1] - h1[0]
            h2[2] = (2.0 / z) * h2[1] - h2[0]
            return c1
        return c0
    hankel_scaled(n + 1, z, h1, h2)
    return h2_shift_combo(n, z, h2)


@nb.njit(cache=True)
def h2_shift_combo(n, z, h2):
    """Scaled H2_{n-1}(z) + i H2_n(z), with H2_{-1} = -H2_1.

    The leading terms of the two expansions cancel; for large |z| the sum is
    taken from the difference series so no digits are lost.
    """
    if abs(z) >= z_asym(n):
        pre = np.sqrt(2.0 / (math.pi * z))
        th = n * 0.5 * math.pi + 0.25 * math.pi
        return 1j * pre * np.exp(1j * th) * _asym_diff(n, n - 1, z, -1.0)
    if n == 0:
        return -h2[1] + 1j * h2[0]
    return h2[n - 1] + 1j * h2[n]


@nb.njit(cache=True)
def jv_scalar(n, z):
    """J_n(z) for any complex z (series or Hankel average)."""
    if abs(z) < Z_SERIES:
        return j_series(n, z)
    h1 = np.empty(n + 2, np.complex128)
    h2 = np.empty(n + 2, np.complex128)
    hankel_scaled(n + 1, z, h1, h2)
    return 0.5 * (h1[n] * np.exp(1j * z) + h2[n] * np.exp(-1j * z))


@nb.njit(cache=True)
def _vec_hankel(n, z):
    out1 = np.empty(z.size, np.complex128)
    out2 = np.empty(z.size, np.complex128)
    h1 = np.empty(n + 2, np.complex128)
    h2 = np.empty(n + 2, np.complex128)
    for i in range(z.size):
        hankel_scaled(n + 1, z[i], h1, h2)
        out1[i] = h1[n]
        out2[i] = h2[n]
    return out1, out2


@nb.njit(cache=True)
def _vec_jv(n, z):
    out = np.empty(z.size, np.complex128)
    for i in range(z.size):
        out[i] = jv_scalar(n, z[i])
    return out


def hankel_scaled_array(n, z):
    """Vectorised scaled Hankel pair (testing and diagnostics)."""
    z = np.asarray(z, dtype=complex)
    a, b = _vec_hankel(int(n), z.ravel())
    return a.reshape(z.shape), b.reshape(z.shape)


def jv_array(n, z):
    """Vectorised J_n of complex argument (testing and diagnostics)."""
    z = np.asarray(z, dtype=complex)
    return _vec_jv(int(n), z.ravel()).reshape(z.shape)
