"""Root systems, reflection groups, the invariant weight, and the derived
constants (total multiplicity, series exponent, sphere mass of the weight).

Only two kinds are supported: the trivial system (classical Laplacian) and
sign groups acting by coordinate flips.  Those are exactly the cases where
the intertwining measure has a computable form, so every code path here can
be checked against an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .special import sphere_area

__all__ = [
    "RootSystemSpec",
    "DunklConstants",
    "trivial",
    "sign_group",
    "weight",
    "group_elements",
    "constants",
    "axis_multiplicities",
    "orbit_points",
    "orbit_distance",
]

KIND_TRIVIAL = "trivial"
KIND_SIGN = "sign"


@dataclass(frozen=True)
class RootSystemSpec:
    """A positive root subsystem with one multiplicity per listed root."""

    dimension: int
    kind: str
    positive_roots: tuple[tuple[float, ...], ...]
    multiplicities: tuple[float, ...]

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError("dimension must be at least 2")
        if self.kind not in (KIND_TRIVIAL, KIND_SIGN):
            raise ValueError(f"unsupported root-system kind {self.kind!r}")
        if len(self.positive_roots) != len(self.multiplicities):
            raise ValueError("one multiplicity per positive root is required")
        if any(k < 0 for k in self.multiplicities):
            raise ValueError("multiplicities must be nonnegative")
        roots = [np.asarray(r, dtype=float) for r in self.positive_roots]
        for r in roots:
            if r.shape != (self.dimension,):
                raise ValueError("root length must match the dimension")
            if not np.any(r):
                raise ValueError("roots must be nonzero")
        for i, r in enumerate(roots):
            for s in roots[i + 1 :]:
                if np.allclose(r, -s):
                    raise ValueError("positive system may not contain opposite roots")
        if self.kind == KIND_SIGN:
            axes = []
            for r in roots:
                nz = np.nonzero(r)[0]
                if len(nz) != 1:
                    raise ValueError("sign-group roots must lie on coordinate axes")
                axes.append(int(nz[0]))
            if len(set(axes)) != len(axes):
                raise ValueError("sign-group roots must use distinct axes")

    @property
    def roots_array(self) -> np.ndarray:
        return np.asarray(self.positive_roots, dtype=float).reshape(
            len(self.positive_roots), self.dimension
        )

    @property
    def gamma(self) -> float:
        return float(sum(self.multiplicities))


@dataclass(frozen=True)
class DunklConstants:
    """Derived scalars: total multiplicity gamma, the series exponent
    lam = d/2 + gamma - 1, the sphere mass of the weight, and the plain
    sphere area."""

    dimension: int
    gamma: float
    lam: float
    d_k: float
    sphere_area: float

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if not self.lam > 0:
            raise ValueError("lambda_k must be positive")
        if not self.d_k > 0:
            raise ValueError("sphere mass of the weight must be positive")


def trivial(dimension: int) -> RootSystemSpec:
    """Empty root system: the classical Laplacian in the given dimension."""
    return RootSystemSpec(dimension, KIND_TRIVIAL, (), ())


def sign_group(
    dimension: int, multiplicities: Sequence[float], axes: Sequence[int] | None = None
) -> RootSystemSpec:
    """Sign group flipping the given axes (defaults to the first m axes),
    with unit roots along them."""
    ks = tuple(float(k) for k in multiplicities)
    if axes is None:
        axes = tuple(range(len(ks)))
    axes = tuple(int(a) for a in axes)
    if len(axes) != len(ks):
        raise ValueError("one multiplicity per axis is required")
    if len(axes) > dimension:
        raise ValueError("more axes than dimensions")
    roots = []
    for a in axes:
        if not 0 <= a < dimension:
            raise ValueError(f"axis {a} out of range")
        e = [0.0] * dimension
        e[a] = 1.0
        roots.append(tuple(e))
    return RootSystemSpec(dimension, KIND_SIGN, tuple(roots), ks)


def axis_multiplicities(spec: RootSystemSpec) -> np.ndarray:
    """Per-coordinate multiplicity vector (zeros on axes without a root).

    Sign-group roots have unit coordinates, so the root scale drops out.
    """
    ks = np.zeros(spec.dimension)
    if spec.kind == KIND_SIGN:
        for root, k in zip(spec.roots_array, spec.multiplicities):
            axis = int(np.nonzero(root)[0][0])
            ks[axis] = k
    return ks


def weight(spec: RootSystemSpec, x) -> float | np.ndarray:
    """Invariant weight prod_roots |<root, x>|**(2k); accepts (..., d) arrays.

    Homogeneous of degree 2*gamma and invariant under the reflection group;
    vanishing on the mirror hyperplanes is a legitimate value.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    pts = np.atleast_2d(x)
    out = np.ones(pts.shape[:-1])
    for root, k in zip(spec.roots_array, spec.multiplicities):
        if k == 0.0:
            continue
        out *= np.abs(pts @ root) ** (2.0 * k)
    return float(out[0]) if scalar else out.reshape(x.shape[:-1])


def group_elements(spec: RootSystemSpec) -> list[np.ndarray]:
    """The full reflection group as explicit orthogonal matrices."""
    d = spec.dimension
    if spec.kind == KIND_TRIVIAL:
        return [np.eye(d)]
    axes = [int(np.nonzero(r)[0][0]) for r in spec.roots_array]
    elems = []
    for mask in range(2 ** len(axes)):
        g = np.eye(d)
        for j, axis in enumerate(axes):
            if mask >> j & 1:
                g[axis, axis] = -1.0
        elems.append(g)
    return elems


def orbit_points(spec: RootSystemSpec, x) -> np.ndarray:
    """Distinct images of x under the reflection group, shape (m, d)."""
    x = np.asarray(x, dtype=float)
    pts = np.array([g @ x for g in group_elements(spec)])
    # dedupe points merged by mirror symmetry (x on a hyperplane)
    _, idx = np.unique(np.round(pts, 12), axis=0, return_index=True)
    return pts[np.sort(idx)]


def orbit_distance(spec: RootSystemSpec, x, y) -> float:
    """min over the group of ||x - g y||."""
    x = np.asarray(x, dtype=float)
    pts = orbit_points(spec, np.asarray(y, dtype=float))
    return float(np.min(np.linalg.norm(pts - x, axis=1)))


def constants(spec: RootSystemSpec, sphere_rule) -> DunklConstants:
    """Assemble the derived constants; the sphere mass of the weight is
    integrated with the supplied rule.  Rejects lam <= 0, which would make
    the series coefficients degenerate."""
    d = spec.dimension
    gamma = spec.gamma
    lam = d / 2.0 + gamma - 1.0
    if not lam > 0:
        raise ValueError(
            f"lambda_k must be positive (got {lam}); "
            "increase the dimension or the multiplicities"
        )
    w = weight(spec, sphere_rule.nodes)
    d_k = float(np.dot(sphere_rule.weights, w))
    return DunklConstants(d, gamma, lam, d_k, sphere_area(d))
