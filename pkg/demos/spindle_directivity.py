"""Directivity and optical theorem for a small spindle.

Solves every angular mode of a parabolic spindle under oblique incidence,
prints the diffraction coefficient over a fan of observation angles and
checks the flux balance behind the body.
"""

import warnings

import numpy as np

from petd import (DEFAULT_ETAS, AxialGrid, ModalSurfaceField, WaveParams, directivity,
                  eta_extrapolate, make_spindle, optical_theorem_balance, solve_modes)

k, theta = 200.0, 0.02
body = make_spindle(0.05, 0.0, 2.0)
grid = AxialGrid.uniform_x(0.0, 2.0, 401)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    runs = [solve_modes(body, WaveParams.from_eta(k, e, theta), grid) for e in DEFAULT_ETAS]
modes = {n: ModalSurfaceField(n, grid, eta_extrapolate([r[n] for r in runs], DEFAULT_ETAS))
         for n in runs[0]}
wp = WaveParams(k, theta)
print(f"modes {min(modes)}..{max(modes)}")
print(f"{'theta*':>7} {'phi*':>5} {'|T|':>10} {'arg T':>8}")
for phi in (0.0, np.pi / 2):
    for th in np.linspace(0.0, 0.1, 6):
        T = directivity(modes, body, wp, float(th), float(phi)).value
        print(f"{th:7.3f} {phi:5.2f} {abs(T):10.6f} {np.angle(T):8.4f}")

bal = optical_theorem_balance(modes, body, wp, 3.0)
print(f"flux {bal.lhs:.6f}  -2 Re T {bal.rhs:.6f}  residual {bal.residual:.1e}")
