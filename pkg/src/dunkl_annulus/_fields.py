"""Scalar-field helpers: anything callable on a point is a field; batch
evaluation uses a vectorized ``batch`` attribute when one is available."""

from __future__ import annotations

from typing import Callable

import numpy as np

ScalarField = Callable[[np.ndarray], float]

__all__ = ["ScalarField", "eval_batch", "constant_field", "rotated_field", "GridField"]


def eval_batch(f: ScalarField, X: np.ndarray) -> np.ndarray:
    """Evaluate a field at rows of X, preferring its vectorized path."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    batch = getattr(f, "batch", None)
    if callable(batch):
        return np.asarray(batch(X), dtype=float)
    return np.array([float(f(x)) for x in X])


class constant_field:
    """Field with one value everywhere."""

    def __init__(self, value: float):
        self.value = float(value)

    def __call__(self, x) -> float:
        return self.value

    def batch(self, X) -> np.ndarray:
        return np.full(len(np.atleast_2d(X)), self.value)


class rotated_field:
    """g.f with (g.f)(x) = f(g^{-1} x) for an orthogonal matrix g."""

    def __init__(self, g: np.ndarray, f: ScalarField):
        self.ginv = np.linalg.inv(np.asarray(g, dtype=float))
        self.f = f

    def __call__(self, x) -> float:
        return float(self.f(self.ginv @ np.asarray(x, dtype=float)))

    def batch(self, X) -> np.ndarray:
        return eval_batch(self.f, np.atleast_2d(X) @ self.ginv.T)


class GridField:
    """Piecewise-multilinear interpolant on a tensor annulus grid.

    Values are stored radius-major against the node ordering of the sphere
    rule the grid was built from.  Interpolation is linear in the radius and
    in the angular parameters (angle on the circle; polar cosine and azimuth
    on the 2-sphere, clamped at the outermost polar levels).
    """

    def __init__(self, radii: np.ndarray, sphere_order: int, d: int, values: np.ndarray):
        self.radii = np.asarray(radii, dtype=float)
        self.d = d
        self.sphere_order = sphere_order
        vals = np.asarray(values, dtype=float)
        if d == 2:
            self.values = vals.reshape(len(self.radii), sphere_order)
        elif d == 3:
            from .quadrature import _gauss_legendre

            self.u_levels, _ = _gauss_legendre(sphere_order)
            self.n_phi = 2 * sphere_order
            self.values = vals.reshape(len(self.radii), sphere_order, self.n_phi)
        else:
            raise ValueError("grids support d in {2, 3}")

    def _radial_bracket(self, r: float) -> tuple[int, int, float]:
        rr = self.radii
        if r <= rr[0]:
            return 0, 0, 0.0
        if r >= rr[-1]:
            return len(rr) - 1, len(rr) - 1, 0.0
        hi = int(np.searchsorted(rr, r))
        lo = hi - 1
        t = (r - rr[lo]) / (rr[hi] - rr[lo])
        return lo, hi, float(t)

    def _angular(self, xhat: np.ndarray, level: np.ndarray) -> float:
        if self.d == 2:
            m = self.values.shape[1]
            th = np.arctan2(xhat[1], xhat[0]) % (2.0 * np.pi)
            pos = th / (2.0 * np.pi) * m
            j = int(np.floor(pos)) % m
            t = pos - np.floor(pos)
            return float((1 - t) * level[j] + t * level[(j + 1) % m])
        u = float(np.clip(xhat[2], -1.0, 1.0))
        uu = self.u_levels
        if u <= uu[0]:
            ilo, ihi, tu = 0, 0, 0.0
        elif u >= uu[-1]:
            ilo, ihi, tu = len(uu) - 1, len(uu) - 1, 0.0
        else:
            ihi = int(np.searchsorted(uu, u))
            ilo = ihi - 1
            tu = (u - uu[ilo]) / (uu[ihi] - uu[ilo])
        m = self.n_phi
        ph = np.arctan2(xhat[1], xhat[0]) % (2.0 * np.pi)
        pos = ph / (2.0 * np.pi) * m
        j = int(np.floor(pos)) % m
        tp = pos - np.floor(pos)

        def slice_val(i):
            row = level[i]
            return (1 - tp) * row[j] + tp * row[(j + 1) % m]

        return float((1 - tu) * slice_val(ilo) + tu * slice_val(ihi))

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        r = float(np.linalg.norm(x))
        xhat = x / r if r > 0 else np.eye(self.d)[0]
        lo, hi, t = self._radial_bracket(r)
        v_lo = self._angular(xhat, self.values[lo])
        if hi == lo:
            return v_lo
        v_hi = self._angular(xhat, self.values[hi])
        return (1 - t) * v_lo + t * v_hi

    def batch(self, X) -> np.ndarray:
        return np.array([self(x) for x in np.atleast_2d(X)])
