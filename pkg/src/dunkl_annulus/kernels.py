"""Annulus geometry, the radial blending coefficients, the ball Poisson
kernel, the two annulus kernels, and the harmonic-extension solver for
boundary data on the two spheres."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._fields import ScalarField, eval_batch
from .errors import TruncationError
from .quadrature import QuadratureRule, mu_rule, mu_tensor_grid
from .rootsystem import DunklConstants, RootSystemSpec, weight
from .special import zonal_sup_bound
from .zonal import truncation_degree, zonal_stream

__all__ = [
    "AnnulusGeometry",
    "SeriesConfig",
    "BoundaryData",
    "coeff_a",
    "coeff_b",
    "poisson_ball",
    "poisson_ball_table",
    "pk1",
    "pk2",
    "pk2_inner",
    "dirichlet_solve",
    "DirichletSolution",
]

_R_SLACK = 1e-12
_BOUNDARY_SNAP = 1e-13


@dataclass(frozen=True, eq=False)
class AnnulusGeometry:
    """The annular domain rho < |x| < 1 together with its root system and
    derived constants."""

    rho: float
    spec: RootSystemSpec
    constants: DunklConstants

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"inner radius must lie in (0,1), got {self.rho}")
        if not self.constants.lam > 0:
            raise ValueError("lambda_k must be positive")

    @property
    def dimension(self) -> int:
        return self.spec.dimension

    def check_closed(self, r: float) -> None:
        if r < self.rho - _R_SLACK or r > 1.0 + _R_SLACK:
            raise ValueError(f"radius {r} outside the closed annulus [{self.rho}, 1]")

    def check_open(self, r: float) -> None:
        if r <= self.rho + _R_SLACK or r >= 1.0 - _R_SLACK:
            raise ValueError(f"radius {r} outside the open annulus ({self.rho}, 1)")

    def series_ratio(self, r: float) -> float:
        """Geometric decay ratio of the kernel series at radius r."""
        return max(r, self.rho / r)


@dataclass(frozen=True)
class SeriesConfig:
    """Truncation policy: cap on the degree and tolerance for the tail."""

    max_degree: int = 256
    tol: float = 1e-8
    margin: float = 1.0

    def __post_init__(self):
        if self.max_degree < 1:
            raise ValueError("max_degree must be >= 1")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if not self.margin >= 1.0:
            raise ValueError("safety margin must be >= 1")

    @property
    def effective_tol(self) -> float:
        return self.tol / self.margin


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Continuous data on the two boundary spheres; ``inner`` is called with
    points of norm rho, ``outer`` with unit points."""

    outer: ScalarField
    inner: ScalarField


# ---------------------------------------------------------------------------
# radial blending coefficients


def _exponent_arrays(geom: AnnulusGeometry, ns: np.ndarray, rs: np.ndarray):
    lam = geom.constants.lam
    ln_rho = math.log(geom.rho)
    ln_r = np.log(rs)[None, :]
    two = (2.0 * lam + 2.0 * ns)[:, None]
    return lam, ln_rho, ln_r, two


def coeff_a_radial(geom: AnnulusGeometry, ns, rs) -> np.ndarray:
    """Outer blending coefficient a_n(r) for degree rows ns and radii rs;
    equals 1 on the unit sphere and 0 on the inner sphere."""
    ns = np.atleast_1d(np.asarray(ns, dtype=float))
    rs = np.atleast_1d(np.asarray(rs, dtype=float))
    lam, ln_rho, ln_r, two = _exponent_arrays(geom, ns, rs)
    e1 = np.exp(-two * (ln_r - ln_rho))
    e2 = np.exp(two * ln_rho)
    return (1.0 - e1) / (1.0 - e2)


def _coeff_columns(geom: AnnulusGeometry, ns, rs):
    """Stable simultaneous columns for the kernel series at radii rs.

    Returns (A, ARN, BRN, CRN) with rows over degrees n:
      A   = a_n(r)
      ARN = a_n(r) * r**n
      BRN = b_n(r) * r**n          (inner-kernel column)
      CRN = (1 - a_n(r)) * r**n    (inner kernel extended to the inner
                                    sphere, the ball-kernel complement)
    All are products of exponentials with nonpositive exponents.
    """
    ns = np.atleast_1d(np.asarray(ns, dtype=float))
    rs = np.atleast_1d(np.asarray(rs, dtype=float))
    lam, ln_rho, ln_r, two = _exponent_arrays(geom, ns, rs)
    nn = ns[:, None]
    e1 = np.exp(-two * (ln_r - ln_rho))
    e2 = np.exp(two * ln_rho)
    den = 1.0 - e2
    a = (1.0 - e1) / den
    arn = a * np.exp(nn * ln_r)
    # b_n(r) r^n = [exp(-(2 lam + n)(ln r - ln rho)) - exp(n ln r + (2 lam + n) ln rho)] / den
    brn = (
        np.exp(-(two - nn) * (ln_r - ln_rho)) - np.exp(nn * ln_r + (two - nn) * ln_rho)
    ) / den
    crn = (np.exp(nn * ln_r - two * (ln_r - ln_rho)) - np.exp(nn * ln_r + two * ln_rho)) / den
    return a, arn, brn, crn


def coeff_a(geom: AnnulusGeometry, n: int, x) -> float:
    """Outer blending coefficient at a point of the closed annulus."""
    r = float(np.linalg.norm(np.asarray(x, dtype=float)))
    geom.check_closed(r)
    r = min(max(r, geom.rho), 1.0)
    return float(coeff_a_radial(geom, [n], [r])[0, 0])


def coeff_b(geom: AnnulusGeometry, n: int, x) -> float:
    """Inner blending coefficient rho**(-n) (1 - a_n); vanishes on the unit
    sphere and equals rho**(-n) on the inner sphere."""
    r = float(np.linalg.norm(np.asarray(x, dtype=float)))
    geom.check_closed(r)
    r = min(max(r, geom.rho), 1.0)
    return float(geom.rho ** (-n) * (1.0 - coeff_a_radial(geom, [n], [r])[0, 0]))


# ---------------------------------------------------------------------------
# ball Poisson kernel


def poisson_ball(
    spec: RootSystemSpec, consts: DunklConstants, x, xi, mu_order: int = 48
) -> float:
    """Poisson kernel of the unit ball, by quadrature of the intertwining
    measure based at the boundary direction (strictly positive inside)."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    r = float(np.linalg.norm(x))
    if r >= 1.0:
        raise ValueError("the ball kernel needs |x| < 1")
    rule = mu_rule(spec, xi, mu_order)
    arg = 1.0 - 2.0 * rule.nodes @ x + r * r
    lam1 = consts.lam + 1.0
    return float((1.0 - r * r) * np.dot(rule.weights, arg**-lam1))


def poisson_ball_table(
    spec: RootSystemSpec,
    consts: DunklConstants,
    X: np.ndarray,
    XI: np.ndarray,
    mu_order: int = 48,
) -> np.ndarray:
    """Matrix of ball-kernel values between interior points X and boundary
    directions XI."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    XI = np.atleast_2d(np.asarray(XI, dtype=float))
    T, W = mu_tensor_grid(spec, mu_order)
    r2 = np.sum(X**2, axis=1)
    lam1 = consts.lam + 1.0
    out = np.empty((len(X), len(XI)))
    budget = max(1, 8_000_000 // max(1, len(T) * len(XI)))
    for lo in range(0, len(X), budget):
        hi = min(lo + budget, len(X))
        dot = np.einsum("mc,qc,sc->mqs", X[lo:hi], T, XI)
        arg = 1.0 - 2.0 * dot + r2[lo:hi, None, None]
        out[lo:hi] = (1.0 - r2[lo:hi, None]) * np.einsum("q,mqs->ms", W, arg**-lam1)
    return out


# ---------------------------------------------------------------------------
# annulus kernels (scalar)


def _require_truncation(geom: AnnulusGeometry, r_ratio: float, cfg: SeriesConfig):
    d, gamma = geom.dimension, geom.constants.gamma
    return truncation_degree(d, gamma, r_ratio, cfg.effective_tol, cfg.max_degree)


def _kernel_series(geom, x, xi, cfg, column: str) -> float:
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    r = float(np.linalg.norm(x))
    geom.check_open(r)
    n_max, _ = _require_truncation(geom, geom.series_ratio(r), cfg)
    ns = np.arange(n_max + 1)
    _, arn, brn, crn = _coeff_columns(geom, ns, [r])
    col = {"outer": arn, "inner": brn, "inner_at_rho": crn}[column][:, 0]
    xhat = x / r
    total = 0.0
    for n, z in zonal_stream(geom.spec, geom.constants, n_max, xhat[None], xi[None]):
        total += col[n] * float(z[0, 0])
    return total


def pk1(geom: AnnulusGeometry, x, xi, cfg: SeriesConfig) -> float:
    """Kernel reproducing outer-sphere data (vanishes on the inner sphere);
    sits between 0 and the ball Poisson kernel."""
    return _kernel_series(geom, x, xi, cfg, "outer")


def pk2(geom: AnnulusGeometry, x, xi, cfg: SeriesConfig) -> float:
    """Kernel reproducing inner-sphere data (vanishes on the unit sphere);
    pair against data evaluated at rho*xi."""
    return _kernel_series(geom, x, xi, cfg, "inner")


def pk2_inner(geom: AnnulusGeometry, x, xi, cfg: SeriesConfig) -> float:
    """The inner kernel with its second slot extended onto the inner sphere;
    equals the ball kernel minus the outer kernel."""
    return _kernel_series(geom, x, xi, cfg, "inner_at_rho")


# ---------------------------------------------------------------------------
# harmonic extension from boundary data


class DirichletSolution:
    """Evaluator for the harmonic extension of boundary data on an annulus.

    Solves the weighted-Laplacian boundary problem by pairing the truncated
    annulus kernels with the data against the supplied sphere rule.  The
    achieved truncation tail is reported per evaluation point; exactly on a
    boundary sphere the data itself is returned (one-sided limit).
    """

    def __init__(
        self,
        geom: AnnulusGeometry,
        data: BoundaryData,
        cfg: SeriesConfig,
        rule: QuadratureRule,
    ):
        self.geom = geom
        self.cfg = cfg
        self.rule = rule
        self.data = data
        spec, consts = geom.spec, geom.constants
        xi = rule.nodes
        w = rule.weights * weight(spec, xi) / consts.d_k
        self._f_out = eval_batch(data.outer, xi)
        self._f_in = eval_batch(data.inner, geom.rho * xi)
        self._c_out = w * self._f_out
        self._c_in = w * self._f_in
        gamma_deg = int(math.ceil(2.0 * consts.gamma))
        if rule.degree_exact > 0:
            self._degree_cap = max(8, rule.degree_exact - gamma_deg - 8)
        else:
            self._degree_cap = cfg.max_degree

    def _truncation(self, ratios: np.ndarray) -> tuple[int, np.ndarray]:
        geom, cfg = self.geom, self.cfg
        d, gamma = geom.dimension, geom.constants.gamma
        worst = float(np.max(ratios))
        try:
            n_eff, _ = truncation_degree(d, gamma, worst, cfg.effective_tol, cfg.max_degree)
        except TruncationError as err:
            n_eff = err.degree
        n_eff = min(n_eff, self._degree_cap)
        tails = np.array([_tail_at(d, gamma, float(t), n_eff) for t in ratios])
        return n_eff, tails

    def value_and_bound(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Values and achieved truncation bounds at the given points."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        geom = self.geom
        radii = np.linalg.norm(X, axis=1)
        for r in radii:
            geom.check_closed(float(r))
        out = np.empty(len(X))
        tails = np.zeros(len(X))
        on_outer = np.abs(radii - 1.0) <= _BOUNDARY_SNAP
        on_inner = np.abs(radii - geom.rho) <= _BOUNDARY_SNAP
        if np.any(on_outer):
            out[on_outer] = eval_batch(self.data.outer, X[on_outer])
        if np.any(on_inner):
            out[on_inner] = eval_batch(self.data.inner, X[on_inner])
        interior = ~(on_outer | on_inner)
        if np.any(interior):
            vals, tl = self._evaluate_interior(X[interior], radii[interior])
            out[interior] = vals
            tails[interior] = tl
        return out, tails

    def _evaluate_interior(self, X, radii):
        geom = self.geom
        rs = np.clip(radii, geom.rho, 1.0)
        ratios = np.maximum(rs, geom.rho / rs)
        n_eff, tails = self._truncation(ratios)
        ns = np.arange(n_eff + 1)
        _, arn, brn, _ = _coeff_columns(geom, ns, rs)
        dirs = X / rs[:, None]
        vals = np.zeros(len(X))
        for n, z in zonal_stream(geom.spec, geom.constants, n_eff, dirs, self.rule.nodes):
            vals += arn[n] * (z @ self._c_out) + brn[n] * (z @ self._c_in)
        return vals, tails

    def batch(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        chunk = max(1, 2_000_000 // max(1, len(self.rule.nodes)))
        parts = [
            self.value_and_bound(X[lo : lo + chunk])[0]
            for lo in range(0, len(X), chunk)
        ]
        return np.concatenate(parts)

    def __call__(self, x) -> float:
        return float(self.batch(np.asarray(x, dtype=float)[None, :])[0])


def _tail_at(d: int, gamma: float, r: float, degree: int) -> float:
    if r <= 0.0:
        return 0.0
    if r >= 1.0:
        return math.inf
    b1 = zonal_sup_bound(degree + 1, d, gamma)
    b2 = zonal_sup_bound(degree + 2, d, gamma)
    q = r * b2 / b1
    if q >= 1.0:
        return math.inf
    return b1 * math.exp((degree + 1) * math.log(r)) / (1.0 - q)


def dirichlet_solve(
    geom: AnnulusGeometry,
    data: BoundaryData,
    cfg: SeriesConfig,
    sphere_rule: QuadratureRule,
) -> DirichletSolution:
    """Harmonic extension of continuous boundary data into the annulus.

    The result is a pure evaluator (callable, with a vectorized ``batch``);
    the constant 1 extends to 1, and restrictions of weighted-harmonic
    polynomials are reproduced.
    """
    return DirichletSolution(geom, data, cfg, sphere_rule)
