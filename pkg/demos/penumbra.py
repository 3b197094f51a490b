"""Field near the shadow boundary of the cone.

Evaluates the exact off-surface field of the cone on a line across the
penumbra r = 2 alpha x and compares it with the two asymptotic forms:
the one derived here and the one as printed in the source.
"""

import math

import numpy as np

from petd import WaveParams, offsurface_field, penumbra_field

alpha, k, y = 0.1, 1000.0, 100.0
wp = WaveParams(k)
x = y / (k * alpha ** 2)
print(f"x = {x:g}, k x = {k * x:g}")
print(f"{'q':>6} {'|u| exact':>10} {'err derived':>12} {'err printed':>12}")
for q in np.linspace(-2.0, 2.0, 9):
    r = (2 * alpha - q / math.sqrt(k * x)) * x
    u = offsurface_field(wp, alpha, x, r)
    d = penumbra_field(wp, alpha, x, r, "derived")
    p = penumbra_field(wp, alpha, x, r, "printed")
    print(f"{q:6.2f} {abs(u):10.5f} {abs(d - u) / abs(u):12.3e} {abs(p - u) / abs(u):12.3e}")
