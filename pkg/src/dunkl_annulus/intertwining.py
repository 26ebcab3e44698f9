"""Application of the intertwining operator as integration against the
compactly supported probability measure attached to the base point."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import QuadratureRule, mu_rule
from .rootsystem import RootSystemSpec

__all__ = ["MuMeasure", "mu_measure", "vk_apply"]


@dataclass(frozen=True, eq=False)
class MuMeasure:
    """The probability measure representing the intertwining operator at a
    base point, realized as a quadrature rule supported in the convex hull
    of the point's reflection orbit."""

    point: np.ndarray
    rule: QuadratureRule


def mu_measure(spec: RootSystemSpec, y, order: int = 16) -> MuMeasure:
    y = np.asarray(y, dtype=float)
    return MuMeasure(y, mu_rule(spec, y, order))


def vk_apply(spec: RootSystemSpec, f, x, order: int = 16) -> float:
    """Intertwined evaluation of f at x: the integral of f against the
    measure based at x.  Exact in the trivial case (returns f(x)); maps the
    constant 1 to 1 for every supported system."""
    rule = mu_rule(spec, np.asarray(x, dtype=float), order)
    vals = np.array([f(z) for z in rule.nodes], dtype=float)
    return float(np.dot(rule.weights, vals))
