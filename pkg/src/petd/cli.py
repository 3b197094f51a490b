"""Command-line front end: ``petd <command> [options]``.

Commands
--------
validate          paraxiality report (exit 3 on a hard failure)
kernel            modal kernel K_n(x*, x) along x
solve             surface field by marching, iteration or closed form
analytic          closed-form cone surface field U^sc(y)
reconstruct       scattered field at points off the surface
directivity       diffraction coefficient T(theta*, phi*)
optical-theorem   flux balance through transverse planes
preset NAME       fig4, cone-vs-analytic or penumbra

Every command writes ``<out>/<name>.csv`` plus a JSON mirror. Unless
``eta`` is set, runs are made at the damped wavenumbers ``k (1 + i eta_j)``
for ``eta_j`` in ``etas`` and extrapolated to real k.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from importlib import metadata
from pathlib import Path

import numpy as np

from . import cone as cone_mod
from .errors import AccuracyWarning, PetdError
from .geometry import Verdict, validate_paraxial
from .io import ConfigError, RunConfig, config_fields, load_config, write_table
from .kernels import KernelEvaluator, SpacePoint, kernel_modal, kernel_modal_closed
from .observables import directivity, optical_theorem_balance, reconstruct_point
from .volterra import (AxialGrid, ModalSurfaceField, eta_extrapolate, incident_modal,
                       mode_count, solve_marching, solve_neumann, surface_weights)

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE, EXIT_HARD_FAIL = 0, 1, 2, 3
PRESETS = ("fig4", "cone-vs-analytic", "penumbra")
DEFAULT_OUT = "petd_out"

# preset defaults; explicit --config/--set values override them
PRESET_BASE = {
    "fig4": {"geometry": "cone", "alpha": "0.04", "k": "5000", "grid": "y", "y0": "0",
             "y1": "20", "nodes": "801", "max_terms": "12"},
    "cone-vs-analytic": {"geometry": "cone", "alpha": "0.04", "k": "5000", "grid": "y",
                         "y0": "0", "y1": "20", "nodes": "1601"},
    "penumbra": {"geometry": "cone", "alpha": "0.1", "k": "1000", "y_pen": "100",
                 "q_max": "3", "n_q": "25"},
}


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _meta(cfg: RunConfig, command: str, **extra) -> dict:
    m = {"program": "petd", "version": _version(), "command": command,
         "config_hash": cfg.digest(), "tolerance": cfg.tolerance}
    if cfg.eta > 0:
        m["eta"] = cfg.eta
    else:
        m["eta"] = 0.0
        m["etas_extrapolated"] = tuple(cfg.etas)
    m.update(extra)
    return m


# ------------------------------------------------------------------ setup


def build_grid(cfg: RunConfig) -> AxialGrid:
    prof = cfg.profile()
    if cfg.grid == "y":
        alpha = cfg.alpha
        grid = AxialGrid.uniform_y(cfg.y0, cfg.y1, cfg.nodes, cfg.k, alpha)
    else:
        x0 = prof.x_start if math.isnan(cfg.x0) else cfg.x0
        x1 = prof.x_end if math.isnan(cfg.x_end) else cfg.x_end
        if not math.isfinite(x1):
            raise ConfigError("x_end", "required for a half-infinite body")
        grid = AxialGrid.uniform_x(x0, x1, cfg.nodes)
    grid.check_support(prof)
    return grid


def _modes(cfg: RunConfig, wp, prof) -> list:
    n_max = mode_count(wp, prof) if cfg.n_max < 0 else cfg.n_max
    return list(range(n_max + 1))


def _solve_one(cfg: RunConfig, eta: float, grid: AxialGrid) -> tuple[dict, dict]:
    """Mode map at one damping, plus run information."""
    prof, wp = cfg.profile(), cfg.wave(eta)
    out, info = {}, {}
    for n in _modes(cfg, wp, prof):
        uin = incident_modal(wp, prof, n, grid.nodes)
        if cfg.solver == "analytic":
            if not (prof.is_cone and wp.theta == 0):
                raise ConfigError("solver", "the closed form covers the cone at axial incidence")
            y = wp.k * prof.alpha ** 2 * grid.nodes
            fld = ModalSurfaceField(0, grid, 1.0 + cone_mod.surface_field_sc(y, cfg.tolerance), uin)
        elif not np.any(uin):
            fld = ModalSurfaceField(n, grid, np.zeros(grid.size, complex), uin)
        elif cfg.solver == "marching":
            ke = KernelEvaluator(prof, wp, n)
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", AccuracyWarning)
                fld = solve_marching(ke, 2 * uin, grid, two_grid=grid.size % 2 == 1,
                                     incident=uin)
            for w in caught:
                print(f"warning: mode {n}, eta {eta:g}: {w.message}", file=sys.stderr)
            if fld.error_estimate is not None:
                info[f"two_grid_error_mode{n}_eta{eta:g}"] = fld.error_estimate
        else:
            ke = KernelEvaluator(prof, wp, n)
            fld, trace = solve_neumann(ke, 2 * uin, grid, max_terms=cfg.max_terms,
                                       tol=cfg.tolerance, start=cfg.start, incident=uin)
            info[f"terms_mode{n}_eta{eta:g}"] = len(trace.terms)
        out[n] = fld
        if n:
            out[-n] = ModalSurfaceField(-n, grid, fld.values, fld.incident)
    return out, info


def solve_config(cfg: RunConfig, grid: AxialGrid | None = None):
    """Per-damping mode maps and the mode map extrapolated to real k.

    Returns ``(runs, modes, info)`` where ``runs`` maps eta to a mode map.
    With a single positive ``eta`` the "extrapolated" map is that run.
    """
    grid = build_grid(cfg) if grid is None else grid
    if cfg.solver == "analytic" and cfg.eta == 0:
        runs = {0.0: _solve_one(cfg, 0.0, grid)[0]}
        return runs, runs[0.0], {}
    runs, info = {}, {}
    for eta in cfg.run_etas:
        runs[eta], inf = _solve_one(cfg, eta, grid)
        info.update(inf)
    if len(runs) == 1:
        return runs, next(iter(runs.values())), info
    etas = list(runs)
    real = cfg.wave(0.0)
    prof = cfg.profile()
    modes = {}
    for n in runs[etas[0]]:
        vals = eta_extrapolate([runs[e][n] for e in etas], etas)
        modes[n] = ModalSurfaceField(n, grid, vals, incident_modal(real, prof, n, grid.nodes))
    return runs, modes, info


def _extrapolated(cfg, per_eta: dict):
    """Combine per-damping values of an observable."""
    etas = list(per_eta)
    if len(etas) == 1:
        return per_eta[etas[0]]
    return eta_extrapolate([per_eta[e] for e in etas], etas)


# --------------------------------------------------------------- commands


def cmd_validate(cfg: RunConfig, out: Path | None, fmt: str = "text") -> int:
    rep = validate_paraxial(cfg.profile(), cfg.wave())
    if fmt == "json":
        print(json.dumps(rep.as_dict(), indent=1, sort_keys=True))
    else:
        for key, verdict in rep.verdict.items():
            print(f"{key:10s} {verdict.name.lower()}")
        print(f"theta {rep.theta:.6g}  max slope {rep.max_slope:.6g}  "
              f"fock angle {rep.max_fock_angle:.6g}  fock length {rep.fock_length:.6g}")
    if out is not None:
        rows = [[k, v.name.lower()] for k, v in rep.verdict.items()]
        write_table(out, "paraxiality", ["condition", "verdict"], rows,
                    _meta(cfg, "validate", theta=rep.theta, max_slope=rep.max_slope,
                          max_fock_angle=rep.max_fock_angle, fock_length=rep.fock_length,
                          threshold=rep.threshold))
    if rep.worst == Verdict.FAIL:
        print("error: paraxiality condition fails hard", file=sys.stderr)
        return EXIT_HARD_FAIL
    if rep.worst == Verdict.WARN:
        print("warning: paraxiality condition above threshold", file=sys.stderr)
    return EXIT_OK


def cmd_kernel(cfg: RunConfig, out: Path) -> int:
    prof, wp = cfg.profile(), cfg.wave()
    grid = build_grid(cfg)
    if math.isnan(cfg.x_star):
        # a closing rear tip makes every row vanish; step back one node
        xs = grid.nodes[-2] if prof.f(grid.nodes[-1]) == 0 else grid.nodes[-1]
    else:
        xs = cfg.x_star
    xv = np.array(cfg.xs) if cfg.xs else np.linspace(grid.nodes[0], xs, 52)[1:-1]
    ke = KernelEvaluator(prof, wp, cfg.mode)
    kv = kernel_modal_closed(ke, np.full(xv.shape, xs), xv)
    kv = np.atleast_1d(kv)
    rows = [[x, k.real, k.imag, abs(k)] for x, k in zip(xv, kv)]
    if cfg.check:
        refs = []
        for x in xv:
            try:
                refs.append(kernel_modal(ke, xs, float(x)))
            except PetdError:
                refs.append(complex(math.nan, math.nan))
        refs = np.array(refs)
        # differences are measured against the table's scale where K itself vanishes
        floor = max(1e-13 * float(np.nanmax(np.abs(refs), initial=0.0)), 1e-300)
        for row, k, ref in zip(rows, kv, refs):
            row += [ref.real, ref.imag, abs(k - ref) / max(abs(ref), floor)]
    cols = ["x", "re_K", "im_K", "abs_K"]
    if cfg.check:
        cols += ["re_K_quadrature", "im_K_quadrature", "rel_diff"]
    write_table(out, "kernel", cols, rows,
                _meta(cfg, "kernel", x_star=float(xs), mode=cfg.mode, k_imag=wp.k.imag))
    return EXIT_OK


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    grid = build_grid(cfg)
    _, modes, info = solve_config(cfg, grid)
    prof = cfg.profile()
    scale = cfg.k * prof.alpha ** 2 if prof.is_cone else math.nan
    rows = []
    for n in sorted(modes):
        if n < 0:
            continue
        f = modes[n]
        usc = f.values - f.incident
        for j, x in enumerate(grid.nodes):
            rows.append([x, x * scale, n, f.values[j].real, f.values[j].imag,
                         usc[j].real, usc[j].imag, abs(f.values[j])])
    write_table(out, "surface", ["x", "y", "mode", "re_U", "im_U", "re_Usc", "im_Usc", "abs_U"],
                rows, _meta(cfg, "solve", solver=cfg.solver, nodes=grid.size, **info))
    return EXIT_OK


def cmd_analytic(cfg: RunConfig, out: Path) -> int:
    ys = np.linspace(cfg.y0, cfg.y1, cfg.nodes)
    u = cone_mod.surface_field_sc(ys, cfg.tolerance)
    P = cone_mod.asympt_constant_P().value
    rows = [[y, v.real, v.imag, abs(v)] for y, v in zip(ys, u)]
    write_table(out, "analytic", ["y", "re_Usc", "im_Usc", "abs_Usc"], rows,
                _meta(cfg, "analytic", re_P=P.real, im_P=P.imag))
    return EXIT_OK


def _default_points(cfg, prof, grid):
    if cfg.xs:
        xs = list(cfg.xs)
    elif prof.is_compact:
        xs = [prof.x_end + 0.5 * (prof.x_end - prof.x_start)]
    else:
        xs = [float(grid.nodes[-1])]
    pts = []
    for x in xs:
        if cfg.rs:
            rs = list(cfg.rs)
        else:
            f = float(prof.f(x)) if prof.contains(x) else float(np.max(prof.f(grid.nodes)))
            rs = [f * m for m in (1.25, 1.5, 2.0, 3.0)]
        pts += [(x, r) for r in rs]
    return pts


def cmd_reconstruct(cfg: RunConfig, out: Path) -> int:
    grid = build_grid(cfg)
    prof = cfg.profile()
    runs, _, info = solve_config(cfg, grid)
    pts = _default_points(cfg, prof, grid)
    rows = []
    for x, r in pts:
        tgt = SpacePoint(x, r, cfg.phi)
        per = {e: reconstruct_point(m, prof, cfg.wave(e), tgt) for e, m in runs.items()}
        usc = complex(_extrapolated(cfg, per))
        real = cfg.wave(0.0 if len(runs) > 1 else next(iter(runs)))
        uin = np.exp(1j * real.k * (real.theta * r * math.cos(cfg.phi) - 0.5 * x * real.theta ** 2))
        tot = usc + uin
        rows.append([x, r, cfg.phi, usc.real, usc.imag, abs(usc), tot.real, tot.imag])
    write_table(out, "field", ["x", "r", "phi", "re_usc", "im_usc", "abs_usc", "re_u", "im_u"],
                rows, _meta(cfg, "reconstruct", **info))
    return EXIT_OK


def cmd_directivity(cfg: RunConfig, out: Path) -> int:
    grid = build_grid(cfg)
    prof = cfg.profile()
    _, modes, info = solve_config(cfg, grid)
    wp = cfg.wave(0.0) if cfg.eta == 0 else cfg.wave()
    rows = []
    for ph in cfg.phis:
        for th in np.linspace(cfg.theta_min, cfg.theta_max, cfg.n_theta):
            d = directivity(modes, prof, wp, float(th), float(ph), check=bool(cfg.check))
            rows.append([th, ph, d.value.real, d.value.imag, abs(d.value)])
    write_table(out, "directivity", ["theta_star", "phi_star", "re_T", "im_T", "abs_T"], rows,
                _meta(cfg, "directivity", **info))
    return EXIT_OK


def cmd_optical(cfg: RunConfig, out: Path) -> int:
    grid = build_grid(cfg)
    prof = cfg.profile()
    if not prof.is_compact:
        raise ConfigError("geometry", "the optical theorem needs a compact body")
    _, modes, info = solve_config(cfg, grid)
    wp = cfg.wave(0.0) if cfg.eta == 0 else cfg.wave()
    length = prof.x_end - prof.x_start
    planes = cfg.planes or (prof.x_end + length, prof.x_end + 2 * length)
    rows = []
    for px in planes:
        b = optical_theorem_balance(modes, prof, wp, float(px))
        rows.append([b.plane_x, b.lhs, b.rhs, b.residual, b.r_max, b.tail, b.n_radii])
    write_table(out, "optical_theorem",
                ["plane_x", "lhs", "rhs", "residual", "r_max", "tail", "n_radii"], rows,
                _meta(cfg, "optical-theorem", **info))
    return EXIT_OK


# ---------------------------------------------------------------- presets


def preset_fig4(cfg: RunConfig, out: Path) -> int:
    """Partial sums of the iteration series on the cone, ``|sum_{m<=M} U^(m)|``."""
    grid = build_grid(cfg)
    prof = cfg.profile()
    M = cfg.max_terms
    sums, march = {}, {}
    for eta in cfg.run_etas:
        ke = KernelEvaluator(prof, cfg.wave(eta), 0)
        W = surface_weights(ke, grid)
        ones = np.ones(grid.size, complex)
        _, trace = solve_neumann(ke, 2 * ones, grid, max_terms=M, tol=0.0, start=cfg.start,
                                 weights=W, incident=ones)
        sums[eta] = np.array(trace.partial_sums())
        march[eta] = solve_marching(ke, 2 * ones, grid, two_grid=False, weights=W).values
    S = _extrapolated(cfg, sums)
    U = _extrapolated(cfg, march)
    y = grid.y
    cols = ["y"] + [f"abs_sum_M{m}" for m in range(1, S.shape[0] + 1)] + ["abs_marching"]
    rows = [[y[j]] + [abs(S[m, j]) for m in range(S.shape[0])] + [abs(U[j])]
            for j in range(grid.size)]
    write_table(out, "fig4", cols, rows, _meta(cfg, "preset fig4", start=cfg.start,
                                               alpha=cfg.alpha, k=cfg.k, nodes=grid.size))
    return EXIT_OK


def preset_cone_vs_analytic(cfg: RunConfig, out: Path) -> int:
    grid = build_grid(cfg)
    prof = cfg.profile()
    if not prof.is_cone:
        raise ConfigError("geometry", "this preset needs the cone")
    per = {}
    for eta in cfg.run_etas:
        ke = KernelEvaluator(prof, cfg.wave(eta), 0)
        per[eta] = solve_marching(ke, 2 * np.ones(grid.size, complex), grid, two_grid=False).values
    U = _extrapolated(cfg, per) - 1.0
    y = grid.y
    A = cone_mod.surface_field_sc(y, cfg.tolerance)
    rows = [[y[j], U[j].real, U[j].imag, A[j].real, A[j].imag, abs(U[j] - A[j])]
            for j in range(grid.size)]
    write_table(out, "cone_vs_analytic",
                ["y", "re_Usc_marching", "im_Usc_marching", "re_Usc_analytic",
                 "im_Usc_analytic", "abs_diff"], rows,
                _meta(cfg, "preset cone-vs-analytic", alpha=cfg.alpha, k=cfg.k, nodes=grid.size))
    return EXIT_OK


def preset_penumbra(cfg: RunConfig, out: Path) -> int:
    prof = cfg.profile()
    if not prof.is_cone:
        raise ConfigError("geometry", "this preset needs the cone")
    alpha = prof.alpha
    wp = cfg.wave(0.0)
    x = cfg.y_pen / (cfg.k * alpha * alpha)
    kx = cfg.k * x
    rows = []
    for q in np.linspace(-cfg.q_max, cfg.q_max, cfg.n_q):
        g = q / math.sqrt(kx)
        r = (2 * alpha - g) * x
        u = cone_mod.offsurface_field(wp, alpha, x, r)
        d = cone_mod.penumbra_field(wp, alpha, x, r, "derived")
        p = cone_mod.penumbra_field(wp, alpha, x, r, "printed")
        rows.append([q, g, r / x, u.real, u.imag, d.real, d.imag, abs(d - u) / abs(u),
                     p.real, p.imag, abs(p - u) / abs(u)])
    write_table(out, "penumbra",
                ["q", "gamma", "r_over_x", "re_u", "im_u", "re_derived", "im_derived",
                 "rel_err_derived", "re_printed", "im_printed", "rel_err_printed"], rows,
                _meta(cfg, "preset penumbra", alpha=alpha, k=cfg.k, kx=kx, y=cfg.y_pen))
    return EXIT_OK


_PRESET_FUNCS = {"fig4": preset_fig4, "cone-vs-analytic": preset_cone_vs_analytic,
                 "penumbra": preset_penumbra}

_COMMANDS = {"kernel": cmd_kernel, "solve": cmd_solve, "analytic": cmd_analytic,
             "reconstruct": cmd_reconstruct, "directivity": cmd_directivity,
             "optical-theorem": cmd_optical}


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")
    common.add_argument("--out", help="output directory (default: petd_out)")
    common.add_argument("--tolerance", type=float, help="relative quadrature tolerance")
    common.add_argument("--eta", type=float,
                        help="run once at Im k = eta Re k instead of extrapolating")
    common.add_argument("--threads", type=int, help="numba worker threads")
    p = argparse.ArgumentParser(prog="petd", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"petd {_version()}")
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("validate", parents=[common], help="paraxiality report")
    v.add_argument("--format", choices=("text", "json"), default="text")
    for name in _COMMANDS:
        sub.add_parser(name, parents=[common], help=f"{name} table")
    pr = sub.add_parser("preset", parents=[common], help="reproduction presets")
    pr.add_argument("name", choices=PRESETS)
    sub.add_parser("config-keys", help="list configuration keys and defaults")
    return p


def _load(args, base=None) -> RunConfig:
    sets = list(args.set)
    if args.tolerance is not None:
        sets.append(f"tolerance={args.tolerance!r}")
    if args.eta is not None:
        sets.append(f"eta={args.eta!r}")
    return load_config(args.config, sets, base)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "config-keys":
        for k, d in config_fields():
            print(f"{k} = {d}")
        return EXIT_OK
    if args.threads is not None:
        import numba
        numba.set_num_threads(max(1, min(args.threads, numba.config.NUMBA_NUM_THREADS)))
    try:
        if args.command == "preset":
            cfg = _load(args, PRESET_BASE[args.name])
            return _PRESET_FUNCS[args.name](cfg, Path(args.out or DEFAULT_OUT))
        cfg = _load(args)
        if args.command == "validate":
            return cmd_validate(cfg, Path(args.out) if args.out else None, args.format)
        return _COMMANDS[args.command](cfg, Path(args.out or DEFAULT_OUT))
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"petd: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PetdError as exc:
        print(f"petd {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
