"""Shared, session-cached solver runs and the acceptance report."""

from __future__ import annotations

import math
import time
import warnings

import numpy as np
import pytest

from petd import (DEFAULT_ETAS, AxialGrid, KernelEvaluator, ModalSurfaceField, WaveParams,
                  eta_extrapolate, make_cone, make_spindle, solve_marching, solve_modes,
                  surface_weights)

# acceptance lines, filled by tests/test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])


class ConeRuns:
    """Axial-incidence cone solved at the default absorption levels."""

    def __init__(self, alpha, k_real, y1=20.0, nodes=1601, keep_weights=False):
        t0 = time.perf_counter()
        self.alpha, self.k_real = alpha, k_real
        self.grid = AxialGrid.uniform_y(0.0, y1, nodes, k_real, alpha)
        self.etas = DEFAULT_ETAS
        self.weights, self.runs = {}, []
        for eta in self.etas:
            ke = KernelEvaluator(make_cone(alpha), WaveParams.from_eta(k_real, eta), 0)
            W = surface_weights(ke, self.grid)
            if keep_weights:
                self.weights[eta] = W
            self.runs.append(solve_marching(ke, 2 * np.ones(nodes, complex), self.grid,
                                            two_grid=False, weights=W))
        self.U = eta_extrapolate(self.runs, self.etas)
        self.elapsed = time.perf_counter() - t0

    @property
    def y(self):
        return self.grid.y

    @property
    def usc(self):
        return self.U - 1.0


@pytest.fixture(scope="session")
def cone_a():
    """Cone alpha = 0.04, k = 5000 on y in [0, 20], 1601 nodes."""
    return ConeRuns(0.04, 5000.0, keep_weights=True)


@pytest.fixture(scope="session")
def cone_b():
    """Same k alpha^2 as :func:`cone_a` with k = 2000.

    The scale factor is not a power of two, so the two runs round differently.
    """
    return ConeRuns(0.04 * math.sqrt(2.5), 2000.0)


@pytest.fixture(scope="session")
def spindle_axial():
    """Spindle(0.05, 0, 10), k = 2000, axial incidence, eta-extrapolated."""
    prof = make_spindle(0.05, 0.0, 10.0)
    grid = AxialGrid.uniform_x(0.0, 10.0, 1001)
    runs = []
    for eta in DEFAULT_ETAS:
        ke = KernelEvaluator(prof, WaveParams.from_eta(2000.0, eta), 0)
        runs.append(solve_marching(ke, 2 * np.ones(grid.size, complex), grid, two_grid=False))
    U = ModalSurfaceField(0, grid, eta_extrapolate(runs, DEFAULT_ETAS),
                          np.ones(grid.size, complex))
    return prof, WaveParams(2000.0), U


@pytest.fixture(scope="session")
def small_spindle():
    """Spindle(0.05, 0, 2), k = 200, oblique incidence theta = 0.02.

    Returns ``(profile, wave, modes)`` with modes extrapolated to real k.
    """
    prof = make_spindle(0.05, 0.0, 2.0)
    grid = AxialGrid.uniform_x(0.0, 2.0, 401)
    per_eta = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for eta in DEFAULT_ETAS:
            per_eta.append(solve_modes(prof, WaveParams.from_eta(200.0, eta, 0.02), grid))
    wp = WaveParams(200.0, 0.02)
    modes = {}
    for n in per_eta[0]:
        vals = eta_extrapolate([m[n] for m in per_eta], DEFAULT_ETAS)
        inc = eta_extrapolate([m[n].incident for m in per_eta], DEFAULT_ETAS)
        modes[n] = ModalSurfaceField(n, grid, vals, inc)
    return prof, wp, modes
