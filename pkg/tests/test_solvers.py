"""Semilinear fixed point, the comparison harness, and the representation
identity checker."""

import numpy as np
import pytest

from dunkl_annulus import rootsystem as rs
from dunkl_annulus._fields import constant_field, eval_batch
from dunkl_annulus.kernels import (
    AnnulusGeometry,
    BoundaryData,
    SeriesConfig,
    dirichlet_solve,
)
from dunkl_annulus.newton_green import green, newton
from dunkl_annulus.quadrature import annulus_rule, sphere_rule
from dunkl_annulus.solvers import (
    RieszMeasure,
    SemilinearProblem,
    comparison_check,
    poisson_jensen_check,
    semilinear_solve,
)
from dunkl_annulus.zonal import zonal_field

RNG = np.random.default_rng(13)


@pytest.fixture(scope="module")
def classical():
    spec = rs.trivial(3)
    consts = rs.constants(spec, sphere_rule(3, 32))
    geom = AnnulusGeometry(0.5, spec, consts)
    cfg = SeriesConfig(max_degree=160, tol=1e-8)
    return geom, cfg


@pytest.fixture(scope="module")
def planar():
    spec = rs.sign_group(2, (1.0, 1.0))
    consts = rs.constants(spec, sphere_rule(2, 256))
    geom = AnnulusGeometry(0.5, spec, consts)
    cfg = SeriesConfig(max_degree=320, tol=1e-7)
    return geom, cfg


def _problem(geom, boundary_value=1.0, phi2=None):
    return SemilinearProblem(
        geometry=geom,
        boundary=BoundaryData(
            constant_field(boundary_value), constant_field(boundary_value)
        ),
        phi1=constant_field(1.0),
        phi2=phi2 or (lambda t: t),
    )


@pytest.fixture(scope="module")
def solved(classical):
    geom, cfg = classical
    prob = _problem(geom)
    res = semilinear_solve(prob, cfg=cfg, tol=1e-6, radial_order=24, sphere_order=6)
    return prob, res


def test_problem_validation(classical):
    geom, _ = classical
    with pytest.raises(ValueError):
        SemilinearProblem(
            geometry=geom,
            boundary=BoundaryData(constant_field(1.0), constant_field(1.0)),
            phi1=constant_field(1.0),
            phi2=lambda t: t + 1.0,  # does not vanish at zero
        )


def test_zero_nonlinearity_gives_boundary_extension(classical):
    geom, cfg = classical
    prob = _problem(geom, phi2=lambda t: 0.0)
    res = semilinear_solve(prob, cfg=cfg, tol=1e-8, radial_order=16, sphere_order=4)
    assert res.converged and res.iterations <= 2
    assert np.max(np.abs(res.values - res.poisson_values)) < 1e-12


def test_zero_boundary_gives_zero(classical):
    geom, cfg = classical
    prob = _problem(geom, boundary_value=0.0)
    res = semilinear_solve(prob, cfg=cfg, tol=1e-8, radial_order=16, sphere_order=4)
    assert res.converged
    assert np.max(np.abs(res.values)) < 1e-10


def test_solver_converges_and_stays_in_bracket(solved):
    _, res = solved
    assert res.converged
    assert res.residual < 1e-6
    assert res.bracket_ok
    c1, c2 = res.bracket
    assert np.all(res.values >= c1 - 1e-5) and np.all(res.values <= c2 + 1e-5)


def test_initialization_independence(classical, solved):
    geom, cfg = classical
    prob, res = solved
    res2 = semilinear_solve(
        prob, cfg=cfg, tol=1e-6, radial_order=24, sphere_order=6, init="lower"
    )
    assert res2.converged
    assert np.max(np.abs(res.values - res2.values)) < 1e-5


def test_iterates_antitone(classical):
    # pointwise smaller input produces pointwise larger image (up to the
    # discrete operator's truncation noise)
    geom, cfg = classical
    prob = _problem(geom)
    res = semilinear_solve(prob, cfg=cfg, tol=1e-6, radial_order=24, sphere_order=6)
    from dunkl_annulus.solvers import _PotentialOperator

    rule = annulus_rule(3, geom.rho, 24, 6, radial_kind="endpoint")
    op = _PotentialOperator(geom, rule, cfg, cutoff=0.2)
    pf = res.poisson_values
    u = res.values

    def T(v):
        return pf - op.apply(np.maximum(v, 0.0))

    v_low = u - 0.05
    v_high = u + 0.05
    assert np.all(T(v_low) >= T(v_high) - 1e-6)


def test_monotone_in_boundary_data(classical, solved):
    geom, cfg = classical
    prob, res = solved
    prob_lo = _problem(geom, boundary_value=0.8)
    res_lo = semilinear_solve(prob_lo, cfg=cfg, tol=1e-6, radial_order=24, sphere_order=6)
    assert np.all(res_lo.values <= res.values + 1e-5)


def test_saturating_nonlinearity(planar):
    geom, cfg = planar
    prob = _problem(geom, phi2=lambda t: t / (1.0 + t))
    # bracket slack covers the coarse grid's kernel-truncation noise
    res = semilinear_solve(
        prob, cfg=cfg, tol=1e-6, radial_order=16, sphere_order=32, bracket_slack=5e-4
    )
    assert res.converged and res.bracket_ok
    assert np.all(res.values > 0)


def test_field_interpolates_grid(solved):
    _, res = solved
    # the returned field reproduces nodal values
    idx = RNG.integers(0, len(res.grid), size=10)
    for i in idx:
        assert res.field(res.grid[i]) == pytest.approx(res.values[i], rel=5e-3, abs=1e-9)


# ---------------------------------------------------------------------------
# comparison harness


def test_comparison_trivially_ordered(solved):
    prob, res = solved
    geom = prob.geometry
    samples = res.grid[:: len(res.grid) // 40]
    u = res.field
    v = lambda x: u(x) - 0.01
    rep = comparison_check(u, v, prob, samples)
    assert rep.certified
    assert rep.ordered is True


def test_comparison_equal_inputs(solved):
    prob, res = solved
    samples = res.grid[:: len(res.grid) // 30]
    rep = comparison_check(res.field, res.field, prob, samples)
    assert rep.certified
    assert rep.ordered is True
    assert abs(rep.max_violation) < 1e-12


def test_comparison_of_solution_pair(classical, solved):
    # lower boundary data must stay below: certified ordering on solver pairs
    geom, cfg = classical
    prob, res = solved
    prob_lo = _problem(geom, boundary_value=0.9)
    res_lo = semilinear_solve(prob_lo, cfg=cfg, tol=1e-6, radial_order=24, sphere_order=6)
    samples = res.grid[:: len(res.grid) // 40]
    # both sides satisfy the equation exactly, so the hypothesis holds with
    # equality; the certification slack absorbs grid-interpolation error in
    # the test integrals, while the ordering itself stays tight
    rep = comparison_check(res.field, res_lo.field, prob, samples, cert_tol=0.05)
    assert rep.certified
    assert rep.distributional_margin > -0.05
    assert rep.ordered is True
    assert rep.max_violation <= 1e-5


def test_comparison_inconclusive_when_boundary_fails(solved):
    prob, res = solved
    samples = res.grid[:: len(res.grid) // 30]
    v = lambda x: res.field(x) + 0.5  # violates the boundary hypothesis
    rep = comparison_check(res.field, v, prob, samples)
    assert not rep.certified
    assert rep.ordered is None


# ---------------------------------------------------------------------------
# representation identity


def test_identity_for_harmonic_field(classical):
    geom, cfg = classical
    h = zonal_field(geom.spec, geom.constants, 2, np.array([0.0, 0.0, 1.0]))
    samples = np.array(
        [RNG.uniform(0.6, 0.85) * _unit(3) for _ in range(5)]
    )
    riesz = RieszMeasure(atoms=((np.array([0.7, 0.0, 0.0]), 0.0),))
    rep = poisson_jensen_check(geom, h, riesz, samples, cfg=cfg)
    assert rep.max_defect < 1e-5


def _unit(d):
    v = RNG.normal(size=d)
    return v / np.linalg.norm(v)


def test_identity_for_negated_kernel(classical):
    # field -N(x0, .) carries a unit atom at x0; the identity rearranges to
    # the two-route Green consistency
    geom, cfg = classical
    spec, consts = geom.spec, geom.constants
    x0 = np.array([0.7, 0.1, 0.05])

    class NegKernel:
        def __call__(self, y):
            return -newton(spec, consts, x0, np.asarray(y), order=48)

        def batch(self, Y):
            from dunkl_annulus.newton_green import newton_cross

            return -newton_cross(spec, consts, x0[None, :], np.atleast_2d(Y), order=48)[0]

    samples = []
    while len(samples) < 5:
        p = RNG.uniform(0.58, 0.85) * _unit(3)
        if np.linalg.norm(p - x0) > 0.2:
            samples.append(p)
    riesz = RieszMeasure(atoms=((x0, 1.0),))
    rep = poisson_jensen_check(geom, NegKernel(), riesz, np.array(samples), cfg=cfg)
    assert rep.max_defect < 1e-5


def test_identity_for_squared_norm(classical):
    # |x|^2 has density 2(d + 2 gamma) against the weighted volume
    geom, cfg = classical
    d, gamma = geom.dimension, geom.constants.gamma

    class Sq:
        def __call__(self, y):
            return float(np.asarray(y) @ np.asarray(y))

        def batch(self, Y):
            Y = np.atleast_2d(Y)
            return np.sum(Y * Y, axis=1)

    samples = np.array([RNG.uniform(0.6, 0.85) * _unit(3) for _ in range(5)])
    riesz = RieszMeasure(density=constant_field(2.0 * (d + 2.0 * gamma)))
    rep = poisson_jensen_check(geom, Sq(), riesz, samples, cfg=cfg)
    assert rep.max_defect < 1e-3


def test_riesz_measure_validation():
    with pytest.raises(ValueError):
        RieszMeasure()
    with pytest.raises(ValueError):
        RieszMeasure(atoms=((np.zeros(3), -1.0),))
