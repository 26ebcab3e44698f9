"""Reproducing kernels of the weighted spherical-harmonic spaces and their
homogeneous extensions off the sphere.

Three evaluation routes, all agreeing on overlapping domains:

* an intertwined Gegenbauer formula (any supported system, single points);
* a streaming Gegenbauer recurrence over direction tables (trivial systems,
  arbitrarily many degrees and points);
* an explicit Jacobi sector basis on the circle (planar sign groups), which
  stays numerically stable far beyond where the intertwined quadrature is
  affordable.
"""

from __future__ import annotations

import math
from typing import Iterator

import numpy as np

from .errors import TruncationError
from .quadrature import mu_tensor_grid, mu_rule
from .rootsystem import DunklConstants, RootSystemSpec, axis_multiplicities, weight
from .special import gegenbauer_sequence, zonal_sup_bound

__all__ = [
    "zonal",
    "zonal_pair",
    "zonal_stream",
    "zonal_table",
    "truncation_degree",
    "default_mu_order",
]

_UNIT_TOL = 1e-8
# cap on scratch-buffer size for the intertwined streaming route
_STREAM_BUDGET = 16_000_000


def default_mu_order(n: int) -> int:
    """Default Gauss-Jacobi points per reflected coordinate for a degree-n
    intertwined evaluation."""
    return max(2 * n + 4, 16)


def _log_prefactor(n: int, lam: float) -> float:
    # (n + lam) (2 lam)_n / (lam n!)
    return (
        math.log((n + lam) / lam)
        + math.lgamma(2.0 * lam + n)
        - math.lgamma(2.0 * lam)
        - math.lgamma(n + 1)
    )


def _prefactors(nmax: int, lam: float) -> np.ndarray:
    return np.exp([_log_prefactor(n, lam) for n in range(nmax + 1)])


def _check_unit(v: np.ndarray, name: str) -> None:
    if abs(np.linalg.norm(v) - 1.0) > _UNIT_TOL:
        raise ValueError(f"{name} must be a unit vector")


def zonal(
    spec: RootSystemSpec,
    consts: DunklConstants,
    n: int,
    x,
    xi,
    mu_order: int | None = None,
) -> float:
    """Degree-n reproducing kernel paired with a unit direction.

    On the sphere this is the intertwined Gegenbauer formula; off the sphere
    the value extends homogeneously as |x|**n times the sphere value.
    """
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    _check_unit(xi, "xi")
    if n < 0:
        raise ValueError("degree must be nonnegative")
    if n == 0:
        return 1.0
    r = float(np.linalg.norm(x))
    if r == 0.0:
        return 0.0
    xhat = x / r
    rule = mu_rule(spec, xhat, mu_order or default_mu_order(n))
    s = np.clip(rule.nodes @ xi, -1.0, 1.0)
    pn = gegenbauer_sequence(n, consts.lam, s)[n]
    val = math.exp(_log_prefactor(n, consts.lam)) * float(np.dot(rule.weights, pn))
    return val * r**n


def zonal_pair(
    spec: RootSystemSpec,
    consts: DunklConstants,
    n: int,
    x,
    y,
    mu_order: int | None = None,
) -> float:
    """Kernel with the homogeneous extension applied independently to both
    slots: |x|**n |y|**n times the sphere-sphere value."""
    y = np.asarray(y, dtype=float)
    ry = float(np.linalg.norm(y))
    if ry == 0.0:
        return 1.0 if n == 0 else 0.0
    return ry**n * zonal(spec, consts, n, x, y / ry, mu_order)


# ---------------------------------------------------------------------------
# streaming direction tables


def _stream_trivial(
    lam: float, nmax: int, dx: np.ndarray, dy: np.ndarray
) -> Iterator[tuple[int, np.ndarray]]:
    s = dx @ dy.T
    pre = _prefactors(nmax, lam)
    p_prev = np.ones_like(s)
    yield 0, p_prev.copy()
    if nmax == 0:
        return
    p_cur = s.copy()
    yield 1, pre[1] * p_cur
    for n in range(2, nmax + 1):
        p_next = (2.0 * (n - 1 + lam) * s * p_cur - (n - 1) * p_prev) / (
            2.0 * lam + n - 1
        )
        p_prev, p_cur = p_cur, p_next
        yield n, pre[n] * p_cur


def _jacobi_rows(mmax: int, a: float, b: float, u: np.ndarray) -> np.ndarray:
    """Jacobi polynomial values P_m^(a,b)(u) for m = 0..mmax, shape
    (mmax+1, len(u)); three-term recurrence, vectorized over u."""
    u = np.asarray(u, dtype=float)
    out = np.empty((mmax + 1,) + u.shape)
    out[0] = 1.0
    if mmax >= 1:
        out[1] = 0.5 * (a - b) + 0.5 * (a + b + 2.0) * u
    for m in range(2, mmax + 1):
        c = 2.0 * m + a + b
        a1 = 2.0 * m * (m + a + b) * (c - 2.0)
        a2 = (c - 1.0) * (a * a - b * b)
        a3 = (c - 1.0) * c * (c - 2.0)
        a4 = 2.0 * (m + a - 1.0) * (m + b - 1.0) * c
        out[m] = ((a2 + a3 * u) * out[m - 1] - a4 * out[m - 2]) / a1
    return out


class _CircleSectorBasis:
    """Orthogonal harmonic sectors on the circle for a planar sign group.

    Degree n splits by coordinate parity into at most two one-dimensional
    sectors, each a Jacobi polynomial in cos(2*theta) times a parity factor.
    Normalization constants are integrated numerically, so no hand-derived
    closed form enters.
    """

    def __init__(self, k1: float, k2: float, nmax: int):
        self.k1, self.k2, self.nmax = k1, k2, nmax
        gamma = k1 + k2
        m_grid = max(4 * (nmax // 2 + 2) + 4 * (int(math.ceil(gamma)) + 2), 512)
        theta = 2.0 * math.pi * np.arange(m_grid) / m_grid
        w_theta = (
            np.abs(np.cos(theta)) ** (2.0 * k1) * np.abs(np.sin(theta)) ** (2.0 * k2)
        )
        dk = w_theta.sum() * (2.0 * math.pi / m_grid)
        vals = self._raw_values(theta)
        # squared sphere-norms against the normalized weighted measure
        self.norms: list[np.ndarray] = []
        scale = 2.0 * math.pi / m_grid / dk
        for n in range(nmax + 1):
            v = vals[n]
            self.norms.append((v**2 @ w_theta) * scale)

    def _raw_values(self, theta: np.ndarray, nmax: int | None = None) -> list[np.ndarray]:
        """Unnormalized sector values for degrees up to nmax at the given
        angles; entry n has shape (dim_n, len(theta))."""
        k1, k2 = self.k1, self.k2
        nmax = self.nmax if nmax is None else nmax
        c, s = np.cos(theta), np.sin(theta)
        u = np.cos(2.0 * theta)
        mmax = nmax // 2 + 1
        j_ee = _jacobi_rows(mmax, k2 - 0.5, k1 - 0.5, u)
        j_oo = _jacobi_rows(mmax, k2 + 0.5, k1 + 0.5, u)
        j_oe = _jacobi_rows(mmax, k2 - 0.5, k1 + 0.5, u)
        j_eo = _jacobi_rows(mmax, k2 + 0.5, k1 - 0.5, u)
        out: list[np.ndarray] = [np.ones((1, len(theta)))]
        for n in range(1, nmax + 1):
            m = n // 2
            if n % 2 == 0:
                rows = [j_ee[m], c * s * j_oo[m - 1]]
            else:
                rows = [c * j_oe[m], s * j_eo[m]]
            out.append(np.stack(rows))
        return out

    def tables(self, theta: np.ndarray, nmax: int | None = None) -> list[np.ndarray]:
        return self._raw_values(theta, nmax)


def _stream_circle(
    spec: RootSystemSpec, nmax: int, dx: np.ndarray, dy: np.ndarray
) -> Iterator[tuple[int, np.ndarray]]:
    ks = axis_multiplicities(spec)
    basis = _circle_basis_cached(float(ks[0]), float(ks[1]), nmax)
    tx = np.arctan2(dx[:, 1], dx[:, 0])
    ty = np.arctan2(dy[:, 1], dy[:, 0])
    vx = basis.tables(tx, nmax)
    vy = basis.tables(ty, nmax)
    for n in range(nmax + 1):
        hx, hy, nu = vx[n], vy[n], basis.norms[n]
        yield n, np.einsum("jm,js,j->ms", hx, hy, 1.0 / nu)


_circle_cache: dict[tuple[float, float], _CircleSectorBasis] = {}


def _circle_basis_cached(k1: float, k2: float, nmax: int) -> _CircleSectorBasis:
    key = (k1, k2)
    hit = _circle_cache.get(key)
    if hit is None or hit.nmax < nmax:
        hit = _CircleSectorBasis(k1, k2, max(nmax, 64))
        _circle_cache[key] = hit
    return hit


def _stream_intertwined(
    spec: RootSystemSpec,
    consts: DunklConstants,
    nmax: int,
    dx: np.ndarray,
    dy: np.ndarray,
    mu_order: int | None,
) -> Iterator[tuple[int, np.ndarray]]:
    order = mu_order or max(16, nmax // 2 + 4)
    T, W = mu_tensor_grid(spec, order)
    mx, my, q = len(dx), len(dy), len(T)
    pre = _prefactors(nmax, consts.lam)
    chunk = max(1, _STREAM_BUDGET // max(1, q * my))
    if chunk >= mx:
        s = np.einsum("mc,qc,sc->mqs", dx, T, dy)
        p_prev = np.ones_like(s)
        p_cur = None
        for n in range(nmax + 1):
            if n == 0:
                yield 0, np.einsum("q,mqs->ms", W, p_prev)
                continue
            if n == 1:
                p_cur = s.copy()
            else:
                p_next = (
                    2.0 * (n - 1 + consts.lam) * s * p_cur - (n - 1) * p_prev
                ) / (2.0 * consts.lam + n - 1)
                p_prev, p_cur = p_cur, p_next
            yield n, pre[n] * np.einsum("q,mqs->ms", W, p_cur)
        return
    # chunked fallback: accumulate whole degree blocks to limit memory
    out = [np.empty((mx, my)) for _ in range(nmax + 1)]
    for lo in range(0, mx, chunk):
        hi = min(lo + chunk, mx)
        for n, z in _stream_intertwined(spec, consts, nmax, dx[lo:hi], dy, mu_order):
            out[n][lo:hi] = z
    for n in range(nmax + 1):
        yield n, out[n]


def zonal_stream(
    spec: RootSystemSpec,
    consts: DunklConstants,
    nmax: int,
    dirs_x: np.ndarray,
    dirs_y: np.ndarray,
    mu_order: int | None = None,
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (n, table) for n = 0..nmax where table[i, j] is the degree-n
    kernel paired between unit directions dirs_x[i] and dirs_y[j]."""
    dx = np.atleast_2d(np.asarray(dirs_x, dtype=float))
    dy = np.atleast_2d(np.asarray(dirs_y, dtype=float))
    if consts.gamma == 0.0 or spec.kind == "trivial":
        yield from _stream_trivial(consts.lam, nmax, dx, dy)
    elif spec.dimension == 2 and spec.kind == "sign":
        yield from _stream_circle(spec, nmax, dx, dy)
    else:
        yield from _stream_intertwined(spec, consts, nmax, dx, dy, mu_order)


def zonal_table(
    spec: RootSystemSpec,
    consts: DunklConstants,
    n: int,
    dirs_x: np.ndarray,
    dirs_y: np.ndarray,
) -> np.ndarray:
    """Single-degree direction table (collects the stream up to n)."""
    for m, z in zonal_stream(spec, consts, n, dirs_x, dirs_y):
        if m == n:
            return z
    raise AssertionError("unreachable")


class zonal_field:
    """The degree-n kernel paired with a fixed unit direction, as a scalar
    field of its first slot (a weighted-harmonic polynomial); vectorized."""

    def __init__(self, spec: RootSystemSpec, consts: DunklConstants, n: int, xi):
        self.spec, self.consts, self.n = spec, consts, n
        self.xi = np.asarray(xi, dtype=float)
        _check_unit(self.xi, "xi")

    def __call__(self, x) -> float:
        return float(self.batch(np.asarray(x, dtype=float)[None, :])[0])

    def batch(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        r = np.linalg.norm(X, axis=1)
        out = np.zeros(len(X))
        ok = r > 0
        if self.n == 0:
            return np.ones(len(X))
        if not np.any(ok):
            return out
        dirs = X[ok] / r[ok, None]
        z = zonal_table(self.spec, self.consts, self.n, dirs, self.xi[None, :])[:, 0]
        out[ok] = r[ok] ** self.n * z
        return out


def truncation_degree(
    d: int, gamma: float, r: float, tol: float, max_degree: int
) -> tuple[int, float]:
    """Smallest degree whose geometric tail estimate drops below tol.

    The tail of a series with terms bounded by B(n) * r**n is dominated,
    once the term ratio q_n = r * B(n+2)/B(n+1) has fallen below one, by
    B(N+1) * r**(N+1) / (1 - q_N).  Raises TruncationError when even the
    maximal degree cannot certify the tolerance.
    """
    if not 0.0 <= r < 1.0:
        raise TruncationError(f"series ratio {r} outside [0, 1)", 0, math.inf)
    log_r = math.log(r) if r > 0 else -math.inf
    tail = math.inf
    for n in range(max_degree + 1):
        b1 = zonal_sup_bound(n + 1, d, gamma)
        b2 = zonal_sup_bound(n + 2, d, gamma)
        q = r * b2 / b1
        if q >= 1.0:
            continue
        tail = b1 * math.exp((n + 1) * log_r) / (1.0 - q) if r > 0 else 0.0
        if tail < tol:
            return n, tail
    raise TruncationError(
        f"tail bound {tail:.3e} still above tolerance {tol:.3e} "
        f"at maximal degree {max_degree}",
        max_degree,
        tail,
    )
