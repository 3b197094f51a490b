"""Partial sums of the iteration series on the cone.

Compares |sum_{m <= M} U^(m)| with the marching solution for a few M,
starting from the doubled incident field. The series alternates near the
tip, which is visible in the printed table.
"""

import numpy as np

from petd import (DEFAULT_ETAS, AxialGrid, KernelEvaluator, WaveParams, eta_extrapolate,
                  make_cone, solve_marching, solve_neumann, surface_weights)

alpha, k, terms = 0.04, 5000.0, 12
cone = make_cone(alpha)
grid = AxialGrid.uniform_y(0.0, 20.0, 401, k, alpha)
ones = np.ones(grid.size, complex)
sums, march = [], []
for eta in DEFAULT_ETAS:
    ke = KernelEvaluator(cone, WaveParams.from_eta(k, eta), 0)
    W = surface_weights(ke, grid)
    _, trace = solve_neumann(ke, 2 * ones, grid, max_terms=terms, tol=0.0, weights=W)
    sums.append(np.array(trace.partial_sums()))
    march.append(solve_marching(ke, 2 * ones, grid, two_grid=False, weights=W).values)
S = eta_extrapolate(sums, DEFAULT_ETAS)
U = eta_extrapolate(march, DEFAULT_ETAS)

shown = (1, 2, 4, 8, 12)
print(f"{'y':>6}" + "".join(f"{'M=' + str(m):>10}" for m in shown) + f"{'marching':>10}")
for j in range(0, grid.size, 40):
    print(f"{grid.y[j]:6.2f}" + "".join(f"{abs(S[m - 1, j]):10.4f}" for m in shown)
          + f"{abs(U[j]):10.4f}")
