"""Difference operator, harmonic-ball kernel, and volume means."""

import math

import numpy as np
import pytest

from dunkl_annulus import rootsystem as rs
from dunkl_annulus.errors import HyperplaneProximityError
from dunkl_annulus.operators import (
    LaplacianStencil,
    ball_mass_quadrature,
    dunkl_laplacian,
    dunkl_laplacian_batch,
    harmonic_kernel,
    volume_mean,
)
from dunkl_annulus.newton_green import ball_mass
from dunkl_annulus.quadrature import ball_rule, mu_rule, sphere_rule
from dunkl_annulus.zonal import zonal_field

RNG = np.random.default_rng(12)


@pytest.fixture(scope="module")
def classical():
    spec = rs.trivial(3)
    consts = rs.constants(spec, sphere_rule(3, 32))
    return spec, consts


@pytest.fixture(scope="module")
def planar():
    spec = rs.sign_group(2, (1.0, 1.0))
    consts = rs.constants(spec, sphere_rule(2, 128))
    return spec, consts


def _off_mirror_point(spec, lo=0.4, hi=0.9):
    while True:
        x = RNG.uniform(lo, hi) * RNG.normal(size=spec.dimension)
        x *= RNG.uniform(lo, hi) / np.linalg.norm(x)
        if spec.kind == "trivial" or np.min(np.abs(x)) > 0.08:
            return x


def test_laplacian_of_constant(classical):
    spec, _ = classical
    assert dunkl_laplacian(spec, lambda z: 4.2, np.array([0.3, 0.2, 0.5])) == 0.0


@pytest.mark.parametrize("fixture", ["classical", "planar"])
def test_laplacian_of_squared_norm(fixture, request):
    # symbolic value: plain part gives 2d, first-order reflection terms give
    # 4*gamma, difference terms vanish by evenness
    spec, consts = request.getfixturevalue(fixture)
    want = 2.0 * (spec.dimension + 2.0 * consts.gamma)
    for _ in range(4):
        x = _off_mirror_point(spec)
        got = dunkl_laplacian(spec, lambda z: float(z @ z), x)
        assert got == pytest.approx(want, abs=1e-7)


def test_laplacian_mixed_polynomial_symbolic(planar):
    # f = x^4 + x y^2 with unit multiplicities: the displayed formula gives
    # 12x^2 + 2x (plain) + 8x^2 (first axis) + 4x (second axis)
    spec, _ = planar
    f = lambda z: float(z[0] ** 4 + z[0] * z[1] ** 2)
    stencil = LaplacianStencil(h=1e-3, richardson=True)
    for _ in range(4):
        x = _off_mirror_point(spec)
        want = 20.0 * x[0] ** 2 + 6.0 * x[0]
        assert dunkl_laplacian(spec, f, x) == pytest.approx(want, abs=2e-5)
        assert dunkl_laplacian(spec, f, x, stencil) == pytest.approx(want, abs=1e-9)


@pytest.mark.parametrize("fixture", ["classical", "planar"])
def test_zonal_fields_are_annihilated(fixture, request):
    spec, consts = request.getfixturevalue(fixture)
    stencil = LaplacianStencil(h=1e-3, richardson=True)
    for n in (1, 2, 4, 6):
        f = zonal_field(spec, consts, n, _unit(spec.dimension))
        for _ in range(3):
            x = _off_mirror_point(spec, 0.5, 0.85)
            assert abs(dunkl_laplacian(spec, f, x, stencil)) < 1e-5


def _unit(d):
    v = RNG.normal(size=d)
    return v / np.linalg.norm(v)


def test_second_order_convergence(planar):
    # halving the step shrinks the defect about fourfold
    spec, _ = planar
    f = lambda z: float(math.sin(z[0]) * math.exp(0.5 * z[1]))
    x = np.array([0.6, 0.45])
    fine = dunkl_laplacian(spec, f, x, LaplacianStencil(h=1e-4, richardson=True))
    e1 = abs(dunkl_laplacian(spec, f, x, LaplacianStencil(h=2e-3)) - fine)
    e2 = abs(dunkl_laplacian(spec, f, x, LaplacianStencil(h=1e-3)) - fine)
    assert e1 / e2 == pytest.approx(4.0, rel=0.2)


def test_hyperplane_guard(planar):
    spec, _ = planar
    with pytest.raises(HyperplaneProximityError) as err:
        dunkl_laplacian(spec, lambda z: float(z @ z), np.array([1e-4, 0.5]))
    assert err.value.root == (1.0, 0.0)


def test_equivariance(planar):
    # conjugating by a group element leaves the operator unchanged
    spec, consts = request_equivariance_data = planar
    f = zonal_field(spec, consts, 3, _unit(2))
    stencil = LaplacianStencil(h=1e-3)
    x = _off_mirror_point(spec)
    base = dunkl_laplacian(spec, lambda z: f(z) ** 2, x, stencil)
    for g in rs.group_elements(spec):
        gf = lambda z: f(np.linalg.inv(g) @ np.asarray(z)) ** 2
        val = dunkl_laplacian(spec, gf, g @ x, stencil)
        assert val == pytest.approx(base, rel=1e-8, abs=1e-8)


def test_batch_matches_pointwise(planar):
    spec, _ = planar
    f = lambda z: float(np.sin(z[0]) + z[1] ** 3)

    class F:
        def __call__(self, z):
            return f(z)

        def batch(self, Z):
            Z = np.atleast_2d(Z)
            return np.sin(Z[:, 0]) + Z[:, 1] ** 3

    X = np.array([_off_mirror_point(spec) for _ in range(5)])
    batch = dunkl_laplacian_batch(spec, F(), X)
    for i, x in enumerate(X):
        assert batch[i] == pytest.approx(dunkl_laplacian(spec, f, x), rel=1e-11)


# ---------------------------------------------------------------------------
# harmonic-ball kernel


def test_harmonic_kernel_classical_indicator(classical):
    spec, _ = classical
    x = np.array([0.6, 0.2, 0.4])
    assert harmonic_kernel(spec, 0.3, x, x + np.array([0.1, 0, 0])) == 1.0
    assert harmonic_kernel(spec, 0.3, x, x + np.array([0.4, 0, 0])) == 0.0


def test_harmonic_kernel_range(planar):
    spec, _ = planar
    for _ in range(30):
        x = RNG.normal(size=2)
        y = RNG.normal(size=2)
        v = harmonic_kernel(spec, RNG.uniform(0.05, 0.8), x, y)
        assert 0.0 <= v <= 1.0


def test_harmonic_kernel_against_quadrature_oracle(planar):
    # brute intertwined quadrature of the ball indicator
    spec, _ = planar
    for _ in range(6):
        x = RNG.uniform(0.3, 0.8) * _unit(2)
        y = RNG.uniform(0.3, 0.8) * _unit(2)
        r = RNG.uniform(0.15, 0.5)
        val = harmonic_kernel(spec, r, x, y)
        rule = mu_rule(spec, y, 4000)
        arg = float(x @ x) + float(y @ y) - 2.0 * rule.nodes @ x
        brute = float(
            np.dot(rule.weights, (np.sqrt(np.maximum(arg, 0.0)) <= r).astype(float))
        )
        assert val == pytest.approx(brute, abs=2e-3)


def test_harmonic_kernel_single_axis():
    spec = rs.sign_group(3, (1.2,), axes=(0,))
    x = np.array([0.5, 0.1, 0.3])
    y = np.array([0.45, 0.15, 0.28])
    v = harmonic_kernel(spec, 0.2, x, y)
    rule = mu_rule(spec, y, 4000)
    arg = float(x @ x) + float(y @ y) - 2.0 * rule.nodes @ x
    brute = float(
        np.dot(rule.weights, (np.sqrt(np.maximum(arg, 0.0)) <= 0.2).astype(float))
    )
    assert v == pytest.approx(brute, abs=2e-3)


# ---------------------------------------------------------------------------
# volume means


def test_volume_mean_of_constant(classical, planar):
    for spec, consts in (classical, planar):
        d = spec.dimension
        rule = ball_rule(d, 24, 24)
        x = _off_mirror_point(spec, 0.5, 0.6)
        got = volume_mean(spec, consts, lambda z: 3.5, x, 0.15, rule)
        assert got == pytest.approx(3.5, rel=1e-10)


@pytest.mark.parametrize("fixture", ["classical", "planar"])
def test_volume_mean_reproduces_harmonic(fixture, request):
    spec, consts = request.getfixturevalue(fixture)
    d = spec.dimension
    rule = ball_rule(d, 32, 24)
    for n in (1, 2, 3):
        u = zonal_field(spec, consts, n, _unit(d))
        x = _off_mirror_point(spec, 0.5, 0.7)
        r = 0.8 * float(np.min(np.abs(x))) if spec.kind == "sign" else 0.15
        r = min(max(r, 0.05), 0.15)
        got = volume_mean(spec, consts, u, x, r, rule)
        assert got == pytest.approx(u(x), abs=1e-5 * max(1.0, abs(u(x))))


def test_volume_mean_submean_for_subharmonic(planar):
    spec, consts = planar
    rule = ball_rule(2, 24, 24)
    u = lambda z: float(z @ z)
    for _ in range(4):
        x = _off_mirror_point(spec, 0.5, 0.7)
        got = volume_mean(spec, consts, u, x, 0.1, rule)
        assert got >= u(x) - 1e-12


def test_ball_mass_scaling_matches_quadrature(planar):
    spec, consts = planar
    for r in (0.1, 0.2, 0.4):
        got = ball_mass_quadrature(spec, r)
        want = ball_mass(consts, r)
        assert got == pytest.approx(want, rel=1e-8)
