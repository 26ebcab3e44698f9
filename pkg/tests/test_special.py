"""Checks for the special-function layer, with independent oracles for
every derived value."""

import math

import numpy as np
import pytest

from dunkl_annulus.special import (
    GegenbauerParam,
    dim_harmonic,
    gegenbauer,
    gegenbauer_sequence,
    pochhammer,
    sphere_area,
    zonal_bound,
    zonal_sup_bound,
)


def test_pochhammer_empty_product():
    assert pochhammer(3.7, 0) == 1.0


def test_pochhammer_factorial():
    assert pochhammer(1.0, 3) == pytest.approx(6.0, abs=0)


def test_pochhammer_hand_product():
    # 0.5 * 1.5 * 2.5 * 3.5 multiplied out by hand
    assert pochhammer(0.5, 4) == pytest.approx(6.5625, rel=1e-15)


def test_pochhammer_recurrence():
    rng = np.random.default_rng(10)
    for _ in range(30):
        x = rng.uniform(-3.0, 5.0)
        n = int(rng.integers(0, 30))
        assert pochhammer(x, n + 1) == pytest.approx(
            pochhammer(x, n) * (x + n), rel=1e-12, abs=1e-300
        )


def test_gegenbauer_degree_zero():
    assert gegenbauer(GegenbauerParam(mu=1.3, n=0), 0.3) == 1.0


def test_gegenbauer_degree_one_matches_generating_series():
    # coefficient of r^1 in (1-2ar+r^2)^(-mu) is 2*mu*a = (2mu)_1/1! * P_1(a)
    assert gegenbauer(GegenbauerParam(mu=0.5, n=1), 0.4) == pytest.approx(0.4)


def test_gegenbauer_value_one_at_right_endpoint():
    for mu in (0.5, 1.0, 2.0):
        for n in (1, 2, 5, 9):
            assert gegenbauer(GegenbauerParam(mu, n), 1.0) == pytest.approx(1.0)


def test_gegenbauer_rejects_outside_interval():
    with pytest.raises(ValueError):
        gegenbauer(GegenbauerParam(0.5, 2), 1.01)


def test_gegenbauer_param_validation():
    with pytest.raises(ValueError):
        GegenbauerParam(mu=-0.6, n=1)
    with pytest.raises(ValueError):
        GegenbauerParam(mu=0.5, n=-1)


def test_gegenbauer_generating_function():
    # partial sums of sum (2mu)_n/n! P_n(a) r^n against the closed form
    rng = np.random.default_rng(11)
    nmax = 60
    for mu in (0.5, 1.0, 2.0):
        for _ in range(8):
            a = rng.uniform(-1.0, 1.0)
            r = rng.uniform(-0.5, 0.5)
            seq = gegenbauer_sequence(nmax, mu, a)
            total = sum(
                pochhammer(2 * mu, n) / math.factorial(n) * seq[n] * r**n
                for n in range(nmax + 1)
            )
            closed = (1.0 - 2.0 * a * r + r * r) ** (-mu)
            assert total == pytest.approx(closed, abs=1e-10)


def test_gegenbauer_sup_on_interval():
    ts = np.linspace(-1.0, 1.0, 201)
    for mu in (0.5, 1.5, 3.0):
        for n in (1, 3, 8, 15):
            vals = gegenbauer_sequence(n, mu, ts)[n]
            assert np.max(np.abs(vals)) <= 1.0 + 1e-12


def _dim_harmonic_bruteforce(n: int, d: int) -> int:
    """Rank computation: dimension of homogeneous degree-n polynomials
    annihilated by the plain Laplacian, via the explicit monomial action."""
    from itertools import combinations_with_replacement

    monos = list(combinations_with_replacement(range(d), n))
    exps = []
    for m in monos:
        e = [0] * d
        for j in m:
            e[j] += 1
        exps.append(tuple(e))
    index = {e: i for i, e in enumerate(exps)}
    out_exps = sorted(
        {tuple(e[j] - 2 if j == c else e[j] for j in range(d))
         for e in exps for c in range(d) if e[c] >= 2}
    )
    out_index = {e: i for i, e in enumerate(out_exps)}
    A = np.zeros((len(out_exps), len(exps)))
    for e, i in index.items():
        for c in range(d):
            if e[c] >= 2:
                tgt = tuple(e[j] - 2 if j == c else e[j] for j in range(d))
                A[out_index[tgt], i] += e[c] * (e[c] - 1)
    if len(out_exps) == 0:
        return len(exps)
    rank = np.linalg.matrix_rank(A)
    return len(exps) - rank


def test_dim_harmonic_small_cases():
    assert dim_harmonic(0, 3) == 1
    assert dim_harmonic(2, 2) == 2  # binomial formula evaluated by hand
    assert dim_harmonic(3, 3) == 7


def test_dim_harmonic_against_rank_oracle():
    for d in (2, 3):
        for n in range(0, 6):
            assert dim_harmonic(n, d) == _dim_harmonic_bruteforce(n, d)


def test_sphere_area():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


def test_zonal_bound_degree_zero():
    # both rising factorials are empty and the dimension is 1
    assert zonal_bound(0, 3, 0.0) == pytest.approx((4 * math.pi) ** 2, rel=1e-12)


def test_zonal_bound_hand_value():
    # ((gamma+d/2)_n |S^1| / (d/2)_n)^2 * dim^5 at n=2, d=2, gamma=1:
    # (2)_2 = 6, (1)_2 = 2, dim = 2  ->  (6 * 2pi / 2)^2 * 32 = 1152 pi^2
    want = (pochhammer(2.0, 2) * 2 * math.pi / pochhammer(1.0, 2)) ** 2 * dim_harmonic(
        2, 2
    ) ** 5
    assert want == pytest.approx(1152 * math.pi**2, rel=1e-14)
    assert zonal_bound(2, 2, 1.0) == pytest.approx(want, rel=1e-12)


def test_zonal_bound_dominates_dimension_when_classical():
    for d in (2, 3):
        for n in range(0, 12):
            assert zonal_bound(n, d, 0.0) >= dim_harmonic(n, d)
            assert zonal_sup_bound(n, d, 0.0) == dim_harmonic(n, d)
