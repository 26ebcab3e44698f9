"""Command-line front end: batch solves, verification sweeps, CSV tables,
and a JSON run summary.

Commands: constants | dirichlet | green | potential | semilinear | verify.
Exit status: 0 success, 1 tolerance failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import rootsystem as rs
from ._fields import constant_field, eval_batch
from .config import RunConfig, parse_config, render_config
from .errors import ConfigError
from .kernels import (
    AnnulusGeometry,
    BoundaryData,
    SeriesConfig,
    dirichlet_solve,
    pk1,
    pk2_inner,
    poisson_ball,
)
from .newton_green import (
    _green_truncation,
    eta,
    green,
    green_potential,
    newton,
)
from .operators import LaplacianStencil, dunkl_laplacian
from .quadrature import annulus_rule, sphere_rule
from .solvers import SemilinearProblem, semilinear_solve
from .zonal import zonal_field, zonal_table

_FLOAT_FMT = "%.17g"


def _fmt(x: float) -> str:
    return _FLOAT_FMT % float(x)


def build_spec(cfg: RunConfig) -> rs.RootSystemSpec:
    if cfg.kind == "trivial":
        return rs.trivial(cfg.dimension)
    return rs.sign_group(cfg.dimension, cfg.multiplicities)


def build_context(cfg: RunConfig):
    spec = build_spec(cfg)
    rule = sphere_rule(cfg.dimension, cfg.resolved_sphere_order())
    consts = rs.constants(spec, rule)
    geom = AnnulusGeometry(cfg.rho, spec, consts)
    series = SeriesConfig(max_degree=cfg.max_degree, tol=cfg.tol)
    return spec, consts, geom, series, rule


def make_scalar_field(name: str, spec, consts):
    """Named boundary/density fields selectable from the configuration."""
    if name == "one":
        return constant_field(1.0)
    if name == "zero":
        return constant_field(0.0)
    if name.startswith("constant:"):
        return constant_field(float(name.split(":", 1)[1]))
    if name == "exp1":

        class _Exp1:
            def __call__(self, x):
                return float(math.exp(np.asarray(x)[0]))

            def batch(self, X):
                return np.exp(np.atleast_2d(X)[:, 0])

        return _Exp1()
    if name.startswith("zonal:"):
        n = int(name.split(":", 1)[1])
        xi = np.ones(spec.dimension) / math.sqrt(spec.dimension)
        return zonal_field(spec, consts, n, xi)
    raise ConfigError([f"unknown field {name!r}"])


def make_phi2(name: str):
    if name == "linear":
        return lambda t: max(t, 0.0)
    if name.startswith("power:"):
        p = float(name.split(":", 1)[1])
        return lambda t: max(t, 0.0) ** p
    if name == "saturating":
        return lambda t: max(t, 0.0) / (1.0 + max(t, 0.0))
    raise ConfigError([f"unknown nonlinearity {name!r}"])


def _sample_interior(geom, rng, count, lo_margin=0.06, hi_margin=0.15):
    d = geom.dimension
    lo = geom.rho * (1.0 + lo_margin)
    hi = 1.0 - hi_margin
    pts = []
    while len(pts) < count:
        v = rng.normal(size=d)
        nv = np.linalg.norm(v)
        if nv < 1e-12:
            continue
        x = rng.uniform(lo, hi) * v / nv
        if geom.spec.kind == "sign" and np.min(np.abs(x)) < 0.05:
            continue
        pts.append(x)
    return np.array(pts)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])


# ---------------------------------------------------------------------------
# commands


def _cmd_constants(cfg, ctx, rng, out):
    spec, consts, geom, series, rule = ctx
    finer = rs.constants(spec, sphere_rule(cfg.dimension, 2 * cfg.resolved_sphere_order()))
    drift = abs(finer.d_k - consts.d_k) / consts.d_k
    rows = [
        [
            cfg.dimension,
            float(cfg.rho),
            consts.gamma,
            consts.lam,
            consts.d_k,
            consts.sphere_area,
            drift,
        ]
    ]
    _write_csv(
        out / "constants.csv",
        ["dimension", "rho", "gamma", "lambda", "d_k", "sphere_area", "d_k_drift"],
        rows,
    )
    ok = drift < 1e-6
    return ok, {"d_k": consts.d_k, "d_k_drift": drift}


def _cmd_dirichlet(cfg, ctx, rng, out):
    spec, consts, geom, series, rule = ctx
    outer = make_scalar_field(cfg.dirichlet_outer, spec, consts)
    inner = make_scalar_field(cfg.dirichlet_inner, spec, consts)
    sol = dirichlet_solve(geom, BoundaryData(outer, inner), series, rule)
    pts = _sample_interior(geom, rng, cfg.samples)
    vals, tails = sol.value_and_bound(pts)
    d = cfg.dimension
    rows = [
        [*(float(p) for p in pts[i]), float(vals[i]), float(tails[i])]
        for i in range(len(pts))
    ]
    _write_csv(
        out / "dirichlet.csv",
        [f"x{j+1}" for j in range(d)] + ["value", "tail_bound"],
        rows,
    )
    results = {"max_tail_bound": float(np.max(tails))}
    ok = bool(np.all(np.isfinite(vals)))
    if cfg.dirichlet_outer == "one" and cfg.dirichlet_inner == "one":
        defect = float(np.max(np.abs(vals - 1.0)))
        results["constant_defect"] = defect
        ok = ok and defect < 1e-7
    return ok, results


def _cmd_green(cfg, ctx, rng, out):
    spec, consts, geom, series, rule = ctx
    pts = _sample_interior(geom, rng, 2 * cfg.green_pairs)
    X, Y = pts[: cfg.green_pairs], pts[cfg.green_pairs :]
    d = cfg.dimension
    rows = []
    worst = 0.0
    routes = ["series", "definition"] if cfg.green_route == "both" else [cfg.green_route]
    for x, y in zip(X, Y):
        vals = {}
        for route in routes:
            vals[route] = green(geom, x, y, route=route, cfg=series)
        _, tail = _green_truncation(
            geom, float(np.linalg.norm(x)), float(np.linalg.norm(y)), series, strict=False
        )
        for route in routes:
            rows.append(
                [*(float(v) for v in x), *(float(v) for v in y), vals[route], route, tail]
            )
        if len(routes) == 2:
            worst = max(worst, abs(vals["series"] - vals["definition"]))
    _write_csv(
        out / "green.csv",
        [f"x{j+1}" for j in range(d)]
        + [f"y{j+1}" for j in range(d)]
        + ["value", "route", "tail_bound"],
        rows,
    )
    results = {"pairs": int(cfg.green_pairs)}
    ok = True
    if len(routes) == 2:
        results["route_disagreement"] = worst
        ok = worst < 1e-6
    return ok, results


def _cmd_potential(cfg, ctx, rng, out):
    spec, consts, geom, series, rule = ctx
    density = make_scalar_field(cfg.potential_density, spec, consts)
    arule = annulus_rule(cfg.dimension, cfg.rho, cfg.radial_order, _angular(cfg))
    pts = _sample_interior(geom, rng, cfg.samples)
    cutoff = cfg.potential_cutoff or None
    tol = 1e-4
    rows = []
    worst = 0.0
    for x in pts:
        res = green_potential(
            geom, density, x, arule, cfg=series, cutoff=cutoff, tol=tol, patch=False
        )
        worst = max(worst, res.bracket)
        rows.append([*(float(v) for v in x), res.value, res.bracket])
    _write_csv(
        out / "potential.csv",
        [f"x{j+1}" for j in range(cfg.dimension)] + ["value", "bracket"],
        rows,
    )
    return worst <= tol, {"max_bracket": worst, "tolerance": tol}


def _angular(cfg) -> int:
    return 64 if cfg.dimension == 2 else 8


def _cmd_semilinear(cfg, ctx, rng, out):
    spec, consts, geom, series, rule = ctx
    boundary = make_scalar_field(cfg.semilinear_boundary, spec, consts)
    prob = SemilinearProblem(
        geometry=geom,
        boundary=BoundaryData(boundary, boundary),
        phi1=make_scalar_field(cfg.semilinear_phi1, spec, consts),
        phi2=make_phi2(cfg.semilinear_phi2),
    )
    res = semilinear_solve(
        prob,
        cfg=series,
        tol=cfg.semilinear_tol,
        max_iter=cfg.semilinear_max_iter,
        damping=cfg.semilinear_damping,
        radial_order=cfg.radial_order,
        sphere_order=_angular(cfg),
    )
    d = cfg.dimension
    rows = [
        [*(float(v) for v in res.grid[i]), float(res.values[i])]
        for i in range(len(res.grid))
    ]
    _write_csv(
        out / "semilinear.csv", [f"x{j+1}" for j in range(d)] + ["value"], rows
    )
    results = {
        "residual": res.residual,
        "iterations": res.iterations,
        "converged": res.converged,
        "bracket_low": res.bracket[0],
        "bracket_high": res.bracket[1],
        "bracket_ok": res.bracket_ok,
    }
    return res.converged and res.bracket_ok, results


def _cmd_verify(cfg, ctx, rng, out):
    spec, consts, geom, series, rule = ctx
    d = cfg.dimension
    checks: list[tuple[str, float, float]] = []

    pts = _sample_interior(geom, rng, 6)
    dirs = pts / np.linalg.norm(pts, axis=1)[:, None]
    elems = rs.group_elements(spec)

    wvals = rs.weight(spec, pts)
    winv = max(
        float(np.max(np.abs(rs.weight(spec, pts @ g.T) - wvals))) for g in elems
    )
    checks.append(("weight_group_invariance", winv, 1e-12))
    t = 1.7
    hom = float(
        np.max(
            np.abs(
                rs.weight(spec, t * pts) - t ** (2 * consts.gamma) * wvals
            )
            / np.maximum(np.abs(wvals), 1e-30)
        )
    )
    checks.append(("weight_homogeneity", hom, 1e-10))

    from .quadrature import mu_rule

    mu = mu_rule(spec, pts[0], cfg.mu_order)
    checks.append(("mu_mass", abs(float(np.sum(mu.weights)) - 1.0), 1e-12))
    hull = float(
        np.max(np.abs(mu.nodes) - np.abs(pts[0])[None, :])
    )
    checks.append(("mu_support_in_hull", max(hull, 0.0), 1e-12))

    # reproducing identity among low degrees
    wq = rule.weights * rs.weight(spec, rule.nodes) / consts.d_k
    repro = 0.0
    for n in range(0, 4):
        for m in range(0, 4):
            zf = zonal_table(spec, consts, m, rule.nodes, dirs[:1])[:, 0]
            zn = zonal_table(spec, consts, n, dirs[1:2], rule.nodes)[0]
            got = float(np.dot(wq, zf * zn))
            want = (
                float(zonal_table(spec, consts, m, dirs[1:2], dirs[:1])[0, 0])
                if m == n
                else 0.0
            )
            repro = max(repro, abs(got - want))
    checks.append(("zonal_reproducing", repro, 1e-7))

    ball_pts = 0.6 * dirs
    pnorm = 0.0
    for x in ball_pts[:3]:
        kern = np.array(
            [poisson_ball(spec, consts, x, xi, mu_order=48) for xi in rule.nodes]
        )
        pnorm = max(pnorm, abs(float(np.dot(wq, kern)) - 1.0))
    checks.append(("poisson_ball_mass", pnorm, 1e-7))

    sol = dirichlet_solve(
        geom, BoundaryData(constant_field(1.0), constant_field(1.0)), series, rule
    )
    checks.append(
        ("dirichlet_constant", float(np.max(np.abs(sol.batch(pts) - 1.0))), 1e-7)
    )

    link = 0.0
    for x, xi in zip(pts[:3], dirs[3:]):
        lhs = pk2_inner(geom, x, xi, series)
        rhs = poisson_ball(spec, consts, x, xi, mu_order=48) - pk1(geom, x, xi, series)
        link = max(link, abs(lhs - rhs))
    checks.append(("inner_kernel_link", link, 1e-7))

    nsym = max(
        abs(
            newton(spec, consts, x, y, order=cfg.mu_order)
            - newton(spec, consts, y, x, order=cfg.mu_order)
        )
        for x, y in zip(pts[:3], pts[3:])
    )
    checks.append(("newton_symmetry", nsym, 1e-8))

    groutes = max(
        abs(
            green(geom, x, y, route="series", cfg=series)
            - green(geom, x, y, route="definition", cfg=series)
        )
        for x, y in zip(pts[:2], pts[2:4])
    )
    checks.append(("green_route_agreement", groutes, 1e-6))
    gsym = max(
        abs(green(geom, x, y, cfg=series) - green(geom, y, x, cfg=series))
        for x, y in zip(pts[:3], pts[3:])
    )
    checks.append(("green_symmetry", gsym, 1e-8))

    stencil = LaplacianStencil(h=1e-3)
    lap = max(
        abs(dunkl_laplacian(spec, zonal_field(spec, consts, n, dirs[0]), x, stencil))
        for n in (1, 2, 3)
        for x in pts[:2]
    )
    checks.append(("zonal_harmonicity_residual", lap, 1e-4))

    etas = [eta(geom, pts[0], r) for r in (0.1, 0.05, 0.02)]
    mono = max(
        max(etas[i + 1] - etas[i], 0.0) for i in range(len(etas) - 1)
    )
    checks.append(("eta_monotone_defect", mono, 1e-12))

    rows = [[name, defect, tol, "pass" if defect <= tol else "FAIL"]
            for name, defect, tol in checks]
    _write_csv(out / "verify.csv", ["check", "defect", "tolerance", "status"], rows)
    results = {name: {"defect": defect, "tolerance": tol} for name, defect, tol in checks}
    ok = all(defect <= tol for _, defect, tol in checks)
    return ok, results


_COMMANDS = {
    "constants": _cmd_constants,
    "dirichlet": _cmd_dirichlet,
    "green": _cmd_green,
    "potential": _cmd_potential,
    "semilinear": _cmd_semilinear,
    "verify": _cmd_verify,
}


def run_command(cfg: RunConfig, command: str, out_dir: str | Path) -> int:
    """Execute one command; writes CSV tables plus run.json, returns the
    exit status (0 ok, 1 tolerance failure)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ctx = build_context(cfg)
    rng = np.random.default_rng(cfg.seed)
    t0 = time.perf_counter()
    ok, results = _COMMANDS[command](cfg, ctx, rng, out)
    wall = time.perf_counter() - t0
    summary = {
        "command": command,
        "status": 0 if ok else 1,
        "seed": cfg.seed,
        "wall_time_s": wall,
        "config": render_config(cfg),
        "results": results,
    }
    with open(out / "run.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dunkl-annulus",
        description=(
            "Annulus potential theory for reflection-weighted Laplacians: "
            "Dirichlet solves, Green functions, potentials, a semilinear "
            "solver, and verification sweeps."
        ),
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="path to the run configuration")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override the seed")
    args = parser.parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
        cfg = parse_config(text)
    except FileNotFoundError:
        print(f"config file not found: {args.config}", file=sys.stderr)
        return 2
    except ConfigError as err:
        diag = {"status": 2, "violations": err.violations}
        print(json.dumps(diag, indent=2), file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.seed = args.seed
    try:
        return run_command(cfg, args.command, args.out)
    except Exception as err:  # structured diagnostics for module errors
        diag = {"status": 1, "error": type(err).__name__, "message": str(err)}
        print(json.dumps(diag, indent=2), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
