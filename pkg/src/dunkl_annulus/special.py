"""Pochhammer symbols, normalized Gegenbauer polynomials, harmonic-space
dimensions, and the explicit zonal sup bound used for series truncation.

The Gegenbauer family used here is normalized so that P_n(1) = 1 for every
degree; it is generated by

    (1 - 2*a*r + r**2)**(-mu) = sum_n (2*mu)_n / n! * P_n(a) * r**n.

Evaluation is by a three-term recurrence, which stays valid down to
mu > -1/2 (at mu = 0 it degenerates to the Chebyshev recurrence).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GegenbauerParam",
    "pochhammer",
    "gegenbauer",
    "gegenbauer_sequence",
    "dim_harmonic",
    "zonal_bound",
    "zonal_sup_bound",
    "sphere_area",
]

# |t| may exceed 1 by this much before being rejected (dot products of unit
# vectors routinely land at 1 + few ulp).
_T_SLACK = 1e-10


def pochhammer(x: float, n: int) -> float:
    """Rising factorial x*(x+1)*...*(x+n-1); the empty product is 1."""
    if n < 0:
        raise ValueError("pochhammer needs n >= 0")
    out = 1.0
    for j in range(n):
        out *= x + j
    return out


def log_pochhammer_ratio(a: float, b: float, n: int) -> float:
    """log of (a)_n / (b)_n for a, b > 0, overflow-free."""
    return (
        math.lgamma(a + n)
        - math.lgamma(a)
        - math.lgamma(b + n)
        + math.lgamma(b)
    )


@dataclass(frozen=True)
class GegenbauerParam:
    """Degree and weight parameter of a normalized Gegenbauer polynomial."""

    mu: float
    n: int

    def __post_init__(self):
        if not self.mu > -0.5:
            raise ValueError(f"Gegenbauer parameter must exceed -1/2, got {self.mu}")
        if self.n < 0:
            raise ValueError(f"degree must be nonnegative, got {self.n}")


def gegenbauer_sequence(nmax: int, mu: float, t) -> np.ndarray:
    """All normalized Gegenbauer values P_0..P_nmax at t.

    Returns an array of shape (nmax+1,) + shape(t).  The recurrence

        (2*mu + n - 1) * P_n = 2*(n - 1 + mu) * t * P_{n-1} - (n - 1) * P_{n-2}

    keeps P_n(1) = 1 exactly for every parameter.
    """
    t = np.asarray(t, dtype=float)
    out = np.empty((nmax + 1,) + t.shape, dtype=float)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = t
    for n in range(2, nmax + 1):
        out[n] = (2.0 * (n - 1 + mu) * t * out[n - 1] - (n - 1) * out[n - 2]) / (
            2.0 * mu + n - 1
        )
    return out


def gegenbauer(param: GegenbauerParam, t: float) -> float:
    """Normalized Gegenbauer polynomial of the given degree at t in [-1, 1]."""
    t = float(t)
    if abs(t) > 1.0 + _T_SLACK:
        raise ValueError(f"Gegenbauer argument {t} outside [-1, 1]")
    t = min(1.0, max(-1.0, t))
    return float(gegenbauer_sequence(param.n, param.mu, t)[param.n])


def dim_harmonic(n: int, d: int) -> int:
    """Dimension of the degree-n harmonic-polynomial space in d variables."""
    if d < 2 or n < 0:
        raise ValueError("need d >= 2 and n >= 0")
    first = math.comb(n + d - 1, n)
    second = math.comb(n + d - 3, n - 2) if n >= 2 else 0
    return first - second


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def zonal_bound(n: int, d: int, gamma: float) -> float:
    """Explicit sup bound for the degree-n zonal kernel on the sphere.

    Equals ((gamma + d/2)_n * |S^{d-1}| / (d/2)_n)**2 * dim_harmonic(n, d)**5.
    Loose, but fully computable; drives truncation-order selection.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    log_ratio = log_pochhammer_ratio(gamma + d / 2.0, d / 2.0, n)
    log_val = 2.0 * (log_ratio + math.log(sphere_area(d))) + 5.0 * math.log(
        dim_harmonic(n, d)
    )
    return math.exp(log_val)


def zonal_sup_bound(n: int, d: int, gamma: float) -> float:
    """Sup bound for the zonal kernel that is sharp in the reflection-free
    case (where the kernel is the classical zonal harmonic, bounded by the
    space dimension); otherwise falls back to the explicit loose bound."""
    if gamma == 0.0:
        return float(dim_harmonic(n, d))
    return zonal_bound(n, d, gamma)
