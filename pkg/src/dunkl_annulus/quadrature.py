"""Deterministic quadrature rules: spheres, radial shells, the solid annulus
and ball, and the intertwining measure attached to a base point."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .rootsystem import RootSystemSpec, axis_multiplicities

__all__ = [
    "QuadratureRule",
    "sphere_rule",
    "annulus_rule",
    "ball_rule",
    "radial_rule",
    "mu_rule",
    "mu_tensor_grid",
]

# multiplicities below this are treated as absent (point mass factor)
_K_TINY = 1e-13


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes/weights with a domain tag; ``degree_exact`` records (where
    meaningful) the largest polynomial degree integrated exactly."""

    nodes: np.ndarray
    weights: np.ndarray
    domain: str
    degree_exact: int = field(default=-1)

    def __post_init__(self):
        if len(self.nodes) != len(self.weights):
            raise ValueError("nodes/weights length mismatch")
        if np.any(self.weights <= 0) and self.domain != "mu":
            raise ValueError("weights must be positive")


@lru_cache(maxsize=64)
def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    return x, w


def radial_rule(a: float, b: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights mapped to [a, b]."""
    if order < 1:
        raise ValueError("order must be >= 1")
    x, w = _gauss_legendre(order)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


@lru_cache(maxsize=64)
def sphere_rule(d: int, order: int) -> QuadratureRule:
    """Quadrature on the unit sphere in dimension 2 or 3.

    d=2: equispaced angles (exact for trigonometric degree order-1).
    d=3: Gauss-Legendre in the polar cosine tensored with 2*order equispaced
    azimuths (exact for spherical-polynomial degree 2*order-1).
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if d == 2:
        theta = 2.0 * math.pi * np.arange(order) / order
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        weights = np.full(order, 2.0 * math.pi / order)
        return QuadratureRule(nodes, weights, "sphere", degree_exact=order - 1)
    if d == 3:
        u, wu = _gauss_legendre(order)
        m = 2 * order
        phi = 2.0 * math.pi * np.arange(m) / m
        su = np.sqrt(1.0 - u**2)
        nodes = np.empty((order * m, 3))
        weights = np.empty(order * m)
        idx = 0
        for i in range(order):
            nodes[idx : idx + m, 0] = su[i] * np.cos(phi)
            nodes[idx : idx + m, 1] = su[i] * np.sin(phi)
            nodes[idx : idx + m, 2] = u[i]
            weights[idx : idx + m] = wu[i] * 2.0 * math.pi / m
            idx += m
        return QuadratureRule(nodes, weights, "sphere", degree_exact=2 * order - 1)
    raise ValueError(f"sphere rules support d in {{2, 3}}, got {d}")


def annulus_rule(
    d: int,
    rho: float,
    radial_order: int,
    sphere_order: int,
    radial_kind: str = "legendre",
) -> QuadratureRule:
    """Tensor rule on the solid annulus rho < |x| < 1, volume Jacobian folded
    into the weights.  All nodes are strictly interior.

    radial_kind="endpoint" folds the boundary-vanishing factor
    (1-r)(r-rho) into the radial weights (exact for integrands vanishing
    linearly on both spheres, e.g. Green-potential integrands); the default
    plain Gauss-Legendre suits integrands without boundary structure.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError(f"inner radius must lie in (0,1), got {rho}")
    if radial_kind == "legendre":
        r, wr = radial_rule(rho, 1.0, radial_order)
    elif radial_kind == "endpoint":
        v, w = roots_jacobi(radial_order, 1.0, 1.0)
        half = 0.5 * (1.0 - rho)
        r = 0.5 * (1.0 + rho) + half * v
        wr = half**3 * w / ((1.0 - r) * (r - rho))
    else:
        raise ValueError(f"unknown radial kind {radial_kind!r}")
    sph = sphere_rule(d, sphere_order)
    nodes = (r[:, None, None] * sph.nodes[None, :, :]).reshape(-1, d)
    weights = (wr * r ** (d - 1))[:, None] * sph.weights[None, :]
    return QuadratureRule(
        nodes, weights.reshape(-1), "annulus", degree_exact=sph.degree_exact
    )


def ball_rule(d: int, radial_order: int, sphere_order: int) -> QuadratureRule:
    """Polar rule on the unit ball; scale nodes by r and weights by r**d to
    integrate over a ball of radius r."""
    r, wr = radial_rule(0.0, 1.0, radial_order)
    sph = sphere_rule(d, sphere_order)
    nodes = (r[:, None, None] * sph.nodes[None, :, :]).reshape(-1, d)
    weights = (wr * r ** (d - 1))[:, None] * sph.weights[None, :]
    return QuadratureRule(nodes, weights.reshape(-1), "ball")


@lru_cache(maxsize=256)
def _jacobi_mu_1d(k: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for the one-dimensional intertwining density
    (1+t)(1-t^2)^(k-1) on [-1,1], normalized to total mass one."""
    t, w = roots_jacobi(order, k - 1.0, k)
    w = w / w.sum()
    return t, w


def mu_tensor_grid(spec: RootSystemSpec, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Scale-free tensor grid (T, w) for the intertwining measure.

    The measure attached to a point y has nodes y * T (componentwise) and
    weights w; coordinates without a reflection (or with zero multiplicity)
    carry the fixed factor t = 1.
    """
    d = spec.dimension
    ks = axis_multiplicities(spec)
    per_axis: list[tuple[np.ndarray, np.ndarray]] = []
    for j in range(d):
        if ks[j] > _K_TINY:
            per_axis.append(_jacobi_mu_1d(float(ks[j]), order))
        else:
            per_axis.append((np.array([1.0]), np.array([1.0])))
    tt = [p[0] for p in per_axis]
    ww = [p[1] for p in per_axis]
    grids = np.meshgrid(*tt, indexing="ij")
    T = np.stack([g.ravel() for g in grids], axis=1)
    W = np.ones(len(T))
    wgrids = np.meshgrid(*ww, indexing="ij")
    for g in wgrids:
        W = W * g.ravel()
    W = W / W.sum()
    return T, W


def mu_rule(spec: RootSystemSpec, y, order: int) -> QuadratureRule:
    """Quadrature for the intertwining probability measure based at y.

    Trivial kind degenerates to the point mass at y.  All nodes live in the
    closed ball of radius |y| (componentwise |node_j| <= |y_j|).
    """
    y = np.asarray(y, dtype=float)
    if spec.kind == "trivial":
        return QuadratureRule(y[None, :].copy(), np.array([1.0]), "mu")
    T, W = mu_tensor_grid(spec, order)
    return QuadratureRule(T * y[None, :], W.copy(), "mu")
