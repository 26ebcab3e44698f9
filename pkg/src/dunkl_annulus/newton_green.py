"""The fundamental-solution kernel, its one-sided series, the inversion
transform, the Green function of the annulus by two independent routes,
Green potentials with singularity excision, and the local-mass bound that
controls the excised error."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._fields import ScalarField, eval_batch
from .errors import TruncationError
from .kernels import (
    AnnulusGeometry,
    BoundaryData,
    SeriesConfig,
    _coeff_columns,
    dirichlet_solve,
)
from .quadrature import QuadratureRule, mu_rule, mu_tensor_grid, radial_rule, sphere_rule
from .rootsystem import (
    DunklConstants,
    RootSystemSpec,
    orbit_distance,
    orbit_points,
    weight,
)
from .special import zonal_sup_bound
from .zonal import truncation_degree, zonal_stream

__all__ = [
    "COLLISION_RTOL",
    "newton",
    "newton_cross",
    "newton_series",
    "kelvin",
    "green",
    "green_cross",
    "GreenEvaluator",
    "GreenPotentialResult",
    "green_potential",
    "eta",
    "eta_shell_bound",
    "ball_mass",
]

# relative orbit distance below which a pair counts as a pole
COLLISION_RTOL = 1e-9


def _is_collision(spec: RootSystemSpec, x, y) -> bool:
    scale = max(1.0, float(np.linalg.norm(x)), float(np.linalg.norm(y)))
    return orbit_distance(spec, x, y) <= COLLISION_RTOL * scale


def ball_mass(consts: DunklConstants, r: float) -> float:
    """Weighted volume of the centered ball of radius r."""
    p = consts.dimension + 2.0 * consts.gamma
    return consts.d_k * r**p / p


# ---------------------------------------------------------------------------
# fundamental-solution kernel


def newton(
    spec: RootSystemSpec, consts: DunklConstants, x, y, order: int = 32
) -> float:
    """Fundamental-solution kernel, symmetric and positive; returns inf when
    y sits on the reflection orbit of x (within the collision radius)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if _is_collision(spec, x, y):
        return math.inf
    rule = mu_rule(spec, y, order)
    # |x - z|^2 + (|y|^2 - |z|^2) as sums of squares: no cancellation near
    # the pole, where the naive r_x^2 + r_y^2 - 2<x,z> form loses all digits
    diff2 = np.sum((x[None, :] - rule.nodes) ** 2, axis=1)
    rest = float(np.dot(y, y)) - np.sum(rule.nodes**2, axis=1)
    arg = diff2 + np.maximum(rest, 0.0)
    lam = consts.lam
    val = float(np.dot(rule.weights, arg**-lam))
    return val / (2.0 * consts.d_k * lam)


def newton_cross(
    spec: RootSystemSpec,
    consts: DunklConstants,
    X: np.ndarray,
    Y: np.ndarray,
    order: int = 32,
) -> np.ndarray:
    """Kernel matrix between point sets X (rows) and Y (columns); collisions
    are NOT screened here, callers excise them."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    T, W = mu_tensor_grid(spec, order)
    lam = consts.lam
    d = X.shape[1]
    out = np.empty((len(X), len(Y)))
    budget = max(1, 8_000_000 // max(1, len(T) * len(Y)))
    # (y_c^2 - z_c^2) = (1 - t_c^2) y_c^2 summed over coordinates
    rest = np.einsum("qc,sc->qs", 1.0 - T**2, Y**2)
    with np.errstate(divide="ignore"):
        for lo in range(0, len(X), budget):
            hi = min(lo + budget, len(X))
            arg = np.broadcast_to(rest, (hi - lo,) + rest.shape).copy()
            for c in range(d):
                arg += (
                    X[lo:hi, c][:, None, None]
                    - T[None, :, c, None] * Y[None, None, :, c]
                ) ** 2
            out[lo:hi] = np.einsum("q,mqs->ms", W, arg**-lam)
    return out / (2.0 * consts.d_k * lam)


def newton_series(geom: AnnulusGeometry, x, y, cfg: SeriesConfig) -> float:
    """One-sided zonal expansion of the kernel, valid for |y| < |x|."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    consts = geom.constants
    rx = float(np.linalg.norm(x))
    ry = float(np.linalg.norm(y))
    if not ry < rx:
        raise ValueError("the one-sided series needs |y| < |x| strictly")
    lam, dk = consts.lam, consts.d_k
    if ry == 0.0:
        return rx ** (-2.0 * lam) / (2.0 * dk * lam)
    ratio = ry / rx
    scale = rx ** (-2.0 * lam) / dk
    n_max, _ = truncation_degree(
        geom.dimension,
        consts.gamma,
        ratio,
        cfg.effective_tol * (2.0 * lam + 2.0) / scale,
        cfg.max_degree,
    )
    dx = (x / rx)[None, :]
    dy = (y / ry)[None, :]
    total = 0.0
    for n, z in zonal_stream(geom.spec, consts, n_max, dx, dy):
        total += ratio**n / (2.0 * lam + 2.0 * n) * float(z[0, 0])
    return scale * total


class kelvin:
    """Inversion transform: |x|**(-2*lam) times the field at x/|x|**2.

    An involution that preserves harmonicity with respect to the weighted
    Laplacian away from the origin.
    """

    def __init__(self, consts: DunklConstants, f: ScalarField):
        self.consts = consts
        self.f = f

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        r2 = float(np.dot(x, x))
        if r2 == 0.0:
            raise ValueError("the inversion transform is undefined at the origin")
        return r2 ** -self.consts.lam * float(self.f(x / r2))

    def batch(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        r2 = np.sum(X**2, axis=1)
        if np.any(r2 == 0.0):
            raise ValueError("the inversion transform is undefined at the origin")
        return r2**-self.consts.lam * eval_batch(self.f, X / r2[:, None])


# ---------------------------------------------------------------------------
# Green function


def _green_coeff(geom: AnnulusGeometry, n_max: int, rx, ry):
    """(n_max+1, len(rx), len(ry)) coefficients of the harmonic correction."""
    consts = geom.constants
    lam, dk = consts.lam, consts.d_k
    ns = np.arange(n_max + 1)
    a, _, _, crn = _coeff_columns(geom, ns, ry)
    nn = ns.astype(float)[:, None]
    arn_y = a * np.exp(nn * np.log(np.atleast_1d(ry))[None, :])
    ln_rx = np.log(np.atleast_1d(rx))
    pow_pos = np.exp(nn * ln_rx)  # rx^n
    pow_neg = np.exp(-(nn + 2.0 * lam) * ln_rx)  # rx^{-n-2lam}
    coef = pow_pos[:, :, None] * arn_y[:, None, :] + pow_neg[:, :, None] * crn[:, None, :]
    denom = dk * (2.0 * lam + 2.0 * nn)
    return coef / denom[:, :, None]


def _green_truncation(
    geom: AnnulusGeometry, rx, ry, cfg: SeriesConfig, strict: bool = True
):
    """Truncation degree for the harmonic-correction series over batches of
    pole and field radii; both geometric ratios are covered.  With
    strict=False the degree is capped instead of raising when the tolerance
    is out of reach (appropriate when the series acts on smooth data, whose
    own coefficient decay controls the dropped terms)."""
    consts = geom.constants
    rho = geom.rho
    rx = np.atleast_1d(rx)
    ry = np.atleast_1d(ry)
    r1 = float(np.max(rx) * np.max(ry))
    r2 = float(rho**2 / (np.min(rx) * np.min(ry)))
    ratio = max(r1, r2)
    scale = min(1.0, float(np.min(rx)) ** (-2.0 * consts.lam)) / (
        consts.d_k * 2.0 * consts.lam
    )
    tol = cfg.effective_tol / max(scale, 1e-300)
    try:
        return truncation_degree(geom.dimension, consts.gamma, ratio, tol, cfg.max_degree)
    except TruncationError as err:
        if strict:
            raise
        return cfg.max_degree, err.tail


def green(
    geom: AnnulusGeometry,
    x,
    y,
    route: str = "series",
    cfg: SeriesConfig | None = None,
    sphere_order: int | None = None,
    newton_order: int = 32,
) -> float:
    """Green function of the annulus with pole x, evaluated at y.

    route="series" subtracts the zonal expansion of the boundary harmonic
    extension; route="definition" solves the boundary problem for the
    kernel's boundary restriction and subtracts.  Returns inf on collision.
    """
    cfg = cfg or SeriesConfig()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    spec, consts = geom.spec, geom.constants
    if _is_collision(spec, x, y):
        return math.inf
    geom.check_open(float(np.linalg.norm(x)))
    geom.check_open(float(np.linalg.norm(y)))
    nk = newton(spec, consts, x, y, order=newton_order)
    if route == "series":
        rx = float(np.linalg.norm(x))
        ry = float(np.linalg.norm(y))
        n_max, _ = _green_truncation(geom, rx, ry, cfg)
        coef = _green_coeff(geom, n_max, [rx], [ry])[:, 0, 0]
        total = 0.0
        for n, z in zonal_stream(spec, consts, n_max, (x / rx)[None], (y / ry)[None]):
            total += coef[n] * float(z[0, 0])
        return nk - total
    if route == "definition":
        order = sphere_order or _default_sphere_order(geom, cfg)
        rule = sphere_rule(geom.dimension, order)
        data = BoundaryData(
            lambda xi, x=x: newton(spec, consts, x, xi, order=newton_order),
            lambda z, x=x: newton(spec, consts, x, z, order=newton_order),
        )
        sol = dirichlet_solve(geom, data, cfg, rule)
        return nk - sol(y)
    raise ValueError(f"unknown route {route!r}")


def _default_sphere_order(geom: AnnulusGeometry, cfg: SeriesConfig) -> int:
    # the boundary data of an interior pole is analytic, so moderate rules
    # resolve it; the extension solver caps its series at the rule anyway
    return 256 if geom.dimension == 2 else 48


def green_cross(
    geom: AnnulusGeometry,
    X: np.ndarray,
    Y: np.ndarray,
    cfg: SeriesConfig | None = None,
    route: str = "series",
    newton_order: int = 32,
    sphere_order: int | None = None,
    strict: bool = True,
    degree_cap: int | None = None,
) -> np.ndarray:
    """Green-function matrix between pole rows X and field columns Y.

    Collisions are not screened; callers handle near-diagonal entries.
    With strict=False the series degree is capped rather than raising, and
    ``degree_cap`` additionally limits it to e.g. a grid's angular
    resolution; the capped matrix is then the exact discrete operator of
    the truncated kernel (accurate against smooth node data).
    """
    cfg = cfg or SeriesConfig()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    spec, consts = geom.spec, geom.constants
    nk = newton_cross(spec, consts, X, Y, order=newton_order)
    rx = np.linalg.norm(X, axis=1)
    ry = np.linalg.norm(Y, axis=1)
    dx = X / rx[:, None]
    dy = Y / ry[:, None]
    if route == "series":
        n_max, _ = _green_truncation(geom, rx, ry, cfg, strict=strict)
        if degree_cap is not None:
            n_max = min(n_max, degree_cap)
        coef = _green_coeff(geom, n_max, rx, ry)
        acc = np.zeros((len(X), len(Y)))
        for n, z in zonal_stream(spec, consts, n_max, dx, dy):
            acc += coef[n] * z
        return nk - acc
    if route == "definition":
        order = sphere_order or _default_sphere_order(geom, cfg)
        rule = sphere_rule(geom.dimension, order)
        xi = rule.nodes
        n_out = newton_cross(spec, consts, X, xi, order=newton_order)
        n_in = newton_cross(spec, consts, X, geom.rho * xi, order=newton_order)
        w = rule.weights * weight(spec, xi) / consts.d_k
        ns = np.arange(cfg.max_degree + 1)
        ratios = np.maximum(ry, geom.rho / ry)
        try:
            n_eff, _ = truncation_degree(
                geom.dimension,
                consts.gamma,
                float(np.max(ratios)),
                cfg.effective_tol,
                cfg.max_degree,
            )
        except TruncationError as err:
            n_eff = err.degree
        _, arn, brn, _ = _coeff_columns(geom, np.arange(n_eff + 1), ry)
        acc = np.zeros((len(X), len(Y)))
        c_out = n_out * w[None, :]
        c_in = n_in * w[None, :]
        for n, z in zonal_stream(spec, consts, n_eff, dy, xi):
            # harmonic extension of the pole-kernel boundary data, at Y
            acc += (arn[n][:, None] * (z @ c_out.T) + brn[n][:, None] * (z @ c_in.T)).T
        return nk - acc
    raise ValueError(f"unknown route {route!r}")


@dataclass(frozen=True, eq=False)
class GreenEvaluator:
    """Bound evaluator for repeated Green-function work on one geometry."""

    geom: AnnulusGeometry
    cfg: SeriesConfig
    route: str = "series"
    newton_order: int = 32

    def __call__(self, x, y) -> float:
        return green(
            self.geom, x, y, route=self.route, cfg=self.cfg, newton_order=self.newton_order
        )

    def cross(self, X, Y) -> np.ndarray:
        return green_cross(
            self.geom, X, Y, cfg=self.cfg, route=self.route, newton_order=self.newton_order
        )


# ---------------------------------------------------------------------------
# local mass bound and Green potentials


def eta(
    geom: AnnulusGeometry,
    x,
    r: float,
    radial_order: int = 48,
    sphere_order: int = 32,
    newton_order: int = 48,
) -> float:
    """Weighted local mass of the fundamental kernel over the orbit-ball
    union of radius r around x; the quantity whose smallness controls
    excised singular integrals."""
    x = np.asarray(x, dtype=float)
    if not 0.0 < r < geom.rho:
        raise ValueError("need 0 < r < rho")
    spec, consts = geom.spec, geom.constants
    centers = orbit_points(spec, x)
    sph = sphere_rule(spec.dimension, sphere_order)
    # radial panels clustered toward the pole
    rr, wr = radial_rule(0.0, 1.0, radial_order)
    s = r * rr**2
    ws = wr * 2.0 * r * rr * s ** (spec.dimension - 1)
    nodes_shell = s[:, None, None] * sph.nodes[None, :, :]
    w_shell = (ws[:, None] * sph.weights[None, :]).ravel()
    total = 0.0
    all_nodes = []
    for c in centers:
        all_nodes.append((c[None, None, :] + nodes_shell).reshape(-1, spec.dimension))
    all_nodes = np.array(all_nodes)  # (n_centers, m, d)
    # overlap correction: weight each node by 1/#covering balls
    for i, c in enumerate(centers):
        pts = all_nodes[i]
        cover = np.zeros(len(pts))
        for cc in centers:
            cover += (np.linalg.norm(pts - cc[None, :], axis=1) <= r + 1e-15).astype(float)
        cover = np.maximum(cover, 1.0)
        nk = newton_cross(spec, consts, x[None, :], pts, order=newton_order)[0]
        wk = weight(spec, pts)
        total += float(np.sum(w_shell * nk * wk / cover))
    return total


def eta_shell_bound(geom: AnnulusGeometry, x, r: float) -> float:
    """Closed-form shell estimate dominating the local mass: the kernel value
    at the origin times the weighted volume between the two centered spheres
    through the orbit ball."""
    consts = geom.constants
    rx = float(np.linalg.norm(np.asarray(x, dtype=float)))
    p = consts.dimension + 2.0 * consts.gamma
    n0 = rx ** (-2.0 * consts.lam) / (2.0 * consts.d_k * consts.lam)
    return ball_mass(consts, 1.0) * n0 * ((rx + r) ** p - (rx - r) ** p)


@dataclass(frozen=True)
class GreenPotentialResult:
    """Value of a Green potential together with the bracket bounding the
    contribution of the excised orbit-ball union."""

    value: float
    bracket: float
    cutoff: float


def _smooth_ramp(t: np.ndarray) -> np.ndarray:
    """C^1 ramp: 0 below 0, 1 above 1."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def green_potential(
    geom: AnnulusGeometry,
    f: ScalarField,
    x,
    rule: QuadratureRule,
    cfg: SeriesConfig | None = None,
    cutoff: float | None = None,
    tol: float = 1e-4,
    patch: bool = True,
    newton_order: int = 32,
) -> GreenPotentialResult:
    """Integral of the Green function against f over the annulus.

    The orbit-ball union around x is blended out of the global rule; when
    ``patch`` is set, polar patches integrate the blended-out region, so the
    bracket (the local-mass bound times sup|f|) conservatively covers what
    remains of the excision error.  With ``patch=False`` the excised mass is
    simply dropped and the bracket bounds it.
    """
    cfg = cfg or SeriesConfig()
    x = np.asarray(x, dtype=float)
    spec, consts = geom.spec, geom.constants
    if cutoff is None:
        cutoff = _auto_cutoff(geom, x, tol, f, rule, patch)
    Y = rule.nodes
    fy = eval_batch(f, Y)
    wk = weight(spec, Y)
    centers = orbit_points(spec, x)
    dists = np.min(
        np.linalg.norm(Y[None, :, :] - centers[:, None, :], axis=2), axis=0
    )
    blend = _smooth_ramp((dists - cutoff) / cutoff)  # 0 inside r, 1 beyond 2r
    keep = blend > 0.0
    cap = rule.degree_exact - 4 if rule.degree_exact > 8 else None
    gx = green_cross(
        geom,
        x[None, :],
        Y[keep],
        cfg=cfg,
        newton_order=newton_order,
        strict=False,
        degree_cap=cap,
    )[0]
    value = float(np.sum(rule.weights[keep] * wk[keep] * fy[keep] * gx * blend[keep]))
    if patch:
        value += _patch_integral(geom, f, x, centers, cutoff, cfg, newton_order)
    sup_f = float(np.max(np.abs(fy))) if len(fy) else 0.0
    bracket = (
        eta(geom, x, min(2.0 * cutoff, 0.999 * geom.rho), newton_order=newton_order)
        * sup_f
    )
    if not patch:
        return GreenPotentialResult(value, bracket, cutoff)
    return GreenPotentialResult(value, 0.25 * bracket, cutoff)


def _node_spacing(rule: QuadratureRule) -> float:
    radii = np.linalg.norm(rule.nodes, axis=1)
    levels = np.unique(np.round(radii, 12))
    r_gap = float(np.min(np.diff(levels))) if len(levels) > 1 else np.inf
    block = rule.nodes[: min(len(rule.nodes), 800)]
    diff = np.linalg.norm(block[:, None, :] - block[None, :, :], axis=2)
    np.fill_diagonal(diff, np.inf)
    a_gap = float(np.median(np.min(diff, axis=1)))
    return min(r_gap, a_gap)


def _auto_cutoff(geom, x, tol, f, rule, patch: bool) -> float:
    if patch:
        # patches integrate the excised region in polar coordinates, so a
        # generous excision keeps the steep part away from the tensor rule
        cut = min(0.2, 0.4 * geom.rho, 0.4 * (1.0 - geom.rho))
        return max(cut, min(4.0 * _node_spacing(rule), 0.45 * geom.rho))
    # excise-only mode: the dropped mass is the bracket, shrink it under tol
    sup_f = max(1e-12, float(np.max(np.abs(eval_batch(f, rule.nodes[::7])))))
    floor = 2.0 * _node_spacing(rule)
    r = 0.5 * geom.rho
    for _ in range(40):
        if eta_shell_bound(geom, x, r) * sup_f <= 0.5 * tol or r <= floor:
            break
        r *= 0.7
    return max(r, floor)


def _patch_integral(geom, f, x, centers, cutoff, cfg, newton_order) -> float:
    """Polar-patch quadrature of the blended-out neighborhood (radius 2*cutoff
    around each orbit point, clipped to the annulus, overlap-corrected)."""
    spec, consts = geom.spec, geom.constants
    d = spec.dimension
    # patch masses scale with the small excised volume; a moderate series
    # depth is plenty
    cfg = SeriesConfig(
        max_degree=min(cfg.max_degree, 96), tol=max(cfg.tol, 1e-7), margin=cfg.margin
    )
    sph = sphere_rule(d, 48 if d == 2 else 12)
    rr, wr = radial_rule(0.0, 1.0, 28)
    s = 2.0 * cutoff * rr**2
    ws = wr * 2.0 * (2.0 * cutoff) * rr * s ** (d - 1)
    total = 0.0
    for c in centers:
        pts = (c[None, None, :] + s[:, None, None] * sph.nodes[None, :, :]).reshape(-1, d)
        w = (ws[:, None] * sph.weights[None, :]).ravel()
        radii = np.linalg.norm(pts, axis=1)
        inside = (radii > geom.rho) & (radii < 1.0)
        if not np.any(inside):
            continue
        pts, w = pts[inside], w[inside]
        dists = np.min(
            np.linalg.norm(pts[None, :, :] - centers[:, None, :], axis=2), axis=0
        )
        ramp = 1.0 - _smooth_ramp((dists - cutoff) / cutoff)
        sel = ramp > 0.0
        if not np.any(sel):
            continue
        pts, w, ramp = pts[sel], w[sel], ramp[sel]
        cover = np.zeros(len(pts))
        for cc in centers:
            cover += (
                np.linalg.norm(pts - cc[None, :], axis=1) <= 2.0 * cutoff + 1e-15
            ).astype(float)
        cover = np.maximum(cover, 1.0)
        gx = green_cross(
            geom, x[None, :], pts, cfg=cfg, newton_order=newton_order, strict=False
        )[0]
        gx = np.where(np.isfinite(gx), gx, 0.0)
        fy = eval_batch(f, pts)
        total += float(np.sum(w * weight(spec, pts) * fy * gx * ramp / cover))
    return total
