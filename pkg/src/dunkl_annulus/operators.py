"""Finite-difference application of the reflection-weighted Laplacian, the
harmonic-ball kernel, and weighted volume means."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from ._fields import ScalarField, eval_batch
from .errors import HyperplaneProximityError
from .quadrature import QuadratureRule, mu_rule, radial_rule, sphere_rule
from .rootsystem import (
    DunklConstants,
    RootSystemSpec,
    axis_multiplicities,
    orbit_points,
    weight,
)

__all__ = [
    "LaplacianStencil",
    "dunkl_laplacian",
    "dunkl_laplacian_batch",
    "dunkl_derivative",
    "harmonic_kernel",
    "volume_mean",
    "ball_mass_quadrature",
]


@dataclass(frozen=True)
class LaplacianStencil:
    """Step size and scheme switches for the difference operator.

    Second derivatives and gradients use central differences; reflection
    terms evaluate the field at the exactly reflected points.
    """

    h: float = 1e-3
    richardson: bool = False
    guard_factor: float = 10.0

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("step must be positive")


def _reflect(root: np.ndarray, x: np.ndarray) -> np.ndarray:
    return x - 2.0 * np.dot(root, x) / np.dot(root, root) * root


def _guard(spec: RootSystemSpec, x: np.ndarray, stencil: LaplacianStencil) -> None:
    for root, k in zip(spec.roots_array, spec.multiplicities):
        if k == 0.0:
            continue
        dist = abs(np.dot(root, x)) / np.linalg.norm(root)
        if dist < stencil.guard_factor * stencil.h:
            raise HyperplaneProximityError(
                f"point {x} lies within {stencil.guard_factor} steps of the "
                f"mirror hyperplane of root {tuple(root)}",
                tuple(root),
            )


def _stencil_points(spec: RootSystemSpec, X: np.ndarray, h: float):
    """All evaluation points needed by the difference operator, stacked as
    (m, n_pts, d): center, +/-h per axis, and one reflection per root."""
    m, d = X.shape
    blocks = [X[:, None, :]]
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        blocks.append((X + e)[:, None, :])
        blocks.append((X - e)[:, None, :])
    for root, k in zip(spec.roots_array, spec.multiplicities):
        if k == 0.0:
            continue
        refl = X - (2.0 * (X @ root) / np.dot(root, root))[:, None] * root[None, :]
        blocks.append(refl[:, None, :])
    return np.concatenate(blocks, axis=1)


def _assemble(spec, X, vals, h):
    """Combine stencil values into the weighted Laplacian."""
    m, d = X.shape
    center = vals[:, 0]
    lap = np.zeros(m)
    grad = np.empty((m, d))
    for j in range(d):
        fp = vals[:, 1 + 2 * j]
        fm = vals[:, 2 + 2 * j]
        lap += (fp - 2.0 * center + fm) / (h * h)
        grad[:, j] = (fp - fm) / (2.0 * h)
    out = lap
    col = 1 + 2 * d
    for root, k in zip(spec.roots_array, spec.multiplicities):
        if k == 0.0:
            continue
        dot = X @ root
        refl = vals[:, col]
        col += 1
        out = out + k * (
            2.0 * (grad @ root) / dot
            - np.dot(root, root) * (center - refl) / (dot * dot)
        )
    return out


def dunkl_laplacian_batch(
    spec: RootSystemSpec, f: ScalarField, X, stencil: LaplacianStencil | None = None
) -> np.ndarray:
    """Difference-operator values at the rows of X (vectorized over points)."""
    stencil = stencil or LaplacianStencil()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    for x in X:
        _guard(spec, x, stencil)

    def apply_at(h: float) -> np.ndarray:
        pts = _stencil_points(spec, X, h)
        vals = eval_batch(f, pts.reshape(-1, X.shape[1])).reshape(pts.shape[:2])
        return _assemble(spec, X, vals, h)

    if not stencil.richardson:
        return apply_at(stencil.h)
    coarse = apply_at(stencil.h)
    fine = apply_at(stencil.h / 2.0)
    return (4.0 * fine - coarse) / 3.0


def dunkl_laplacian(
    spec: RootSystemSpec, f: ScalarField, x, stencil: LaplacianStencil | None = None
) -> float:
    """Weighted Laplacian at one point: plain Laplacian plus first-order and
    reflection-difference corrections for every root."""
    return float(dunkl_laplacian_batch(spec, f, np.asarray(x, dtype=float)[None, :], stencil)[0])


def dunkl_derivative(
    spec: RootSystemSpec, f: ScalarField, x, direction, h: float = 1e-5
) -> float:
    """First-order difference operator in the given direction: directional
    derivative plus the weighted reflection differences."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(direction, dtype=float)
    val = (f(x + h * xi) - f(x - h * xi)) / (2.0 * h)
    fx = f(x)
    for root, k in zip(spec.roots_array, spec.multiplicities):
        if k == 0.0:
            continue
        dot = float(np.dot(root, x))
        if abs(dot) < 1e-12:
            raise HyperplaneProximityError(
                f"point {x} lies on the mirror hyperplane of root {tuple(root)}",
                tuple(root),
            )
        val += k * np.dot(root, xi) * (fx - f(_reflect(root, x))) / dot
    return float(val)


# ---------------------------------------------------------------------------
# harmonic-ball kernel and volume means


def _mu1_tail(k: float, a: float) -> float:
    """Mass of the one-dimensional intertwining density on [a, 1]."""
    if a <= -1.0:
        return 1.0
    if a >= 1.0:
        return 0.0
    # density (1+t)(1-t^2)^(k-1) dt on [-1,1] maps to a Beta(k+1, k) density
    # under s = (1+t)/2
    return 1.0 - float(betainc(k + 1.0, k, (a + 1.0) / 2.0))


def harmonic_kernel(
    spec: RootSystemSpec, r: float, x, y, order: int = 64
) -> float:
    """Mass that the intertwining measure at y gives to the r-ball event
    around x; in [0, 1], and the plain ball indicator when no reflections
    are present."""
    if r <= 0:
        raise ValueError("radius must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ks = axis_multiplicities(spec)
    active = [j for j in range(spec.dimension) if ks[j] > 1e-13]
    base = float(np.dot(x, x)) + float(np.dot(y, y)) - r * r
    fixed = sum(2.0 * x[j] * y[j] for j in range(spec.dimension) if j not in active)
    need = base - fixed  # remaining requirement: sum_j 2 x_j y_j t_j >= need
    if not active:
        return 1.0 if need <= 0 else 0.0
    if len(active) == 1:
        j = active[0]
        beta = 2.0 * x[j] * y[j]
        if abs(beta) < 1e-300:
            return 1.0 if need <= 0 else 0.0
        a = need / beta
        k = float(ks[j])
        if beta > 0:
            return _mu1_tail(k, a)
        return 1.0 - _mu1_tail(k, a) if -1.0 < a < 1.0 else (1.0 if a >= 1.0 else 0.0)
    # two or more reflected coordinates: integrate the innermost tail mass
    # over quadrature in the outer ones
    j0 = active[0]
    rest = active[1:]
    from .quadrature import _jacobi_mu_1d

    t0, w0 = _jacobi_mu_1d(float(ks[j0]), order)
    total = 0.0
    for tt, ww in zip(t0, w0):
        xj = x.copy()
        yj = y.copy()
        # fold coordinate j0 at value t into the fixed part
        sub_need = need - 2.0 * x[j0] * y[j0] * tt
        total += ww * _tail_over(spec, ks, rest, x, y, sub_need, order)
    return float(min(1.0, max(0.0, total)))


def _tail_over(spec, ks, active, x, y, need, order):
    if len(active) == 1:
        j = active[0]
        beta = 2.0 * x[j] * y[j]
        if abs(beta) < 1e-300:
            return 1.0 if need <= 0 else 0.0
        a = need / beta
        k = float(ks[j])
        if beta > 0:
            return _mu1_tail(k, a)
        return 1.0 - _mu1_tail(k, a) if -1.0 < a < 1.0 else (1.0 if a >= 1.0 else 0.0)
    from .quadrature import _jacobi_mu_1d

    j0 = active[0]
    t0, w0 = _jacobi_mu_1d(float(ks[j0]), order)
    total = 0.0
    for tt, ww in zip(t0, w0):
        total += ww * _tail_over(spec, ks, active[1:], x, y, need - 2.0 * x[j0] * y[j0] * tt, order)
    return total


def ball_mass_quadrature(
    spec: RootSystemSpec, r: float, radial_order: int = 32, sphere_order: int = 32
) -> float:
    """Weighted volume of the centered r-ball by quadrature (oracle side of
    the closed homogeneity formula)."""
    rr, wr = radial_rule(0.0, r, radial_order)
    sph = sphere_rule(spec.dimension, sphere_order)
    w_sphere = float(np.dot(sph.weights, weight(spec, sph.nodes)))
    p = spec.dimension - 1 + 2.0 * spec.gamma
    return float(np.sum(wr * rr**p)) * w_sphere


def _mu1_norm(k: float) -> float:
    from scipy.special import roots_jacobi

    _, w = roots_jacobi(max(8, int(math.ceil(k)) + 4), k - 1.0, k)
    return float(np.sum(w))


def _mu1_interval_rule(k: float, lo: float, hi: float, q: int, corner: int):
    """Quadrature for the density (1+t)^k (1-t)^(k-1) / norm on [lo, hi]
    where the interval touches t=+1 (corner=+1, absorbing the (1-t)^(k-1)
    endpoint factor) or t=-1 (corner=-1, absorbing (1+t)^k)."""
    from scipy.special import roots_jacobi

    if hi <= lo:
        return np.empty(0), np.empty(0)
    half = 0.5 * (hi - lo)
    norm = _mu1_norm(k)
    if corner > 0:
        v, w = roots_jacobi(q, k - 1.0, 0.0)
        t = lo + half * (v + 1.0)
        # (1-t)^(k-1) = half^(k-1) (1-v)^(k-1) when hi == 1
        weights = w * (1.0 + t) ** k * half**k / norm
    else:
        v, w = roots_jacobi(q, 0.0, k)
        t = lo + half * (v + 1.0)
        # (1+t)^k = half^k (1+v)^k when lo == -1
        weights = w * (1.0 - t) ** (k - 1.0) * half ** (k + 1.0) / norm
    return t, weights


def volume_mean(
    spec: RootSystemSpec,
    consts: DunklConstants,
    u: ScalarField,
    x,
    r: float,
    rule: QuadratureRule,
    mu_order: int = 16,
) -> float:
    """Weighted volume mean of u over the r-ball event at x.

    Harmonic fields are reproduced; subharmonic ones sit below their mean.
    For a fixed node t of the intertwining grid, the ball-kernel event is
    the exact ball |y - t*x| <= R(t) with R(t)^2 = r^2 - sum_j (1-t_j^2)
    x_j^2; the t-integration is nested with exact support limits per
    coordinate, so every integrand stays smooth.  ``rule`` is a unit-ball
    template scaled to each event ball.
    """
    from .quadrature import _jacobi_mu_1d

    x = np.asarray(x, dtype=float)
    if rule.domain != "ball":
        raise ValueError("volume_mean needs a unit-ball rule template")
    d = consts.dimension
    p = d + 2.0 * consts.gamma
    mass = consts.d_k * r**p / p
    ks = axis_multiplicities(spec)
    active = [j for j in range(d) if ks[j] > 1e-13]

    leaves: list[tuple[np.ndarray, float, float]] = []

    def collect(idx: int, tvec: np.ndarray, slack: float, wacc: float) -> None:
        if slack <= 0.0:
            return
        if idx == len(active):
            leaves.append((tvec * x, math.sqrt(slack), wacc))
            return
        j = active[idx]
        xj2 = x[j] * x[j]
        k = float(ks[j])
        if xj2 <= 1e-300:
            segs = [_jacobi_mu_1d(k, mu_order)]
        else:
            frac = slack / xj2
            tstar = 0.0 if frac >= 1.0 else math.sqrt(1.0 - frac)
            segs = [
                _mu1_interval_rule(k, tstar, 1.0, mu_order, +1),
                _mu1_interval_rule(k, -1.0, -tstar, mu_order, -1),
            ]
        for tt, ww in segs:
            for t1, w1 in zip(tt, ww):
                tv = tvec.copy()
                tv[j] = t1
                collect(idx + 1, tv, slack - (1.0 - t1 * t1) * xj2, wacc * w1)

    collect(0, np.ones(d), r * r, 1.0)
    if not leaves:
        return 0.0
    centers = np.array([lf[0] for lf in leaves])
    radii = np.array([lf[1] for lf in leaves])
    wacc = np.array([lf[2] for lf in leaves])
    pts = centers[:, None, :] + radii[:, None, None] * rule.nodes[None, :, :]
    flat = pts.reshape(-1, d)
    vals = (eval_batch(u, flat) * weight(spec, flat)).reshape(len(leaves), -1)
    per_ball = vals @ rule.weights
    total = float(np.sum(wacc * radii**d * per_ball))
    return total / mass
