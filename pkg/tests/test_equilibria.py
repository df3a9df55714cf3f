import math

import mpmath
import numpy as np
import pytest

from seiaqr import (
    ModelParams,
    Stability,
    classify_stability,
    disease_free_long,
    disease_free_short,
    endemic_long,
    jacobian,
    lyapunov_v0,
    lyapunov_vstar,
    persistence_bounds,
    rc_long,
    rc_short,
    rhs_long,
    short_char_coeffs,
)
from seiaqr.equilibria import g
from seiaqr.errors import DomainError, InvalidTheta, NoEndemicEquilibrium, NotAnEquilibrium
from seiaqr.model import ModelKind

from conftest import random_long_params, random_short_params


def limiting_jacobian(p, x):
    """Hand-derived Jacobian of the limiting system (incidence over S0)."""
    S, E, I, A = x[:4]
    k = p.beta / p.S0
    F = p.a * E + I + p.b * A
    d = p.d
    return np.array([
        [-k * F - d, -k * p.a * S, -k * S, -k * p.b * S, 0, 0],
        [k * F, k * p.a * S - (p.c + d), k * S, k * p.b * S, 0, 0],
        [0, p.p * p.c, -p.B1, 0, 0, 0],
        [0, (1 - p.p) * p.c, 0, -p.B2, 0, 0],
        [0, 0, p.q1, p.q2, -(p.r3 + d), 0],
        [0, 0, p.r1, p.r2, p.r3, -d],
    ])


def test_disease_free_long(india):
    v0 = disease_free_long(india)
    assert v0.S == pytest.approx(1.9940e9, rel=1e-4)
    assert v0.S == 77575 / 3.8905e-5
    assert tuple(v0)[1:] == (0.0,) * 5
    unit = india.with_values(lam=1.0, d=1.0)
    assert tuple(disease_free_long(unit)) == (1.0, 0, 0, 0, 0, 0)


def test_endemic_india(india):
    star = endemic_long(india)
    assert star.E == pytest.approx(5.35e3, rel=2e-3)
    assert star.I == pytest.approx(3.05e3, rel=5e-3)
    assert star.N == pytest.approx(india.S0, rel=1e-9)
    assert np.all(np.abs(rhs_long(india, star)) <= 1e-9 * np.maximum(np.abs(star), india.lam))


def test_endemic_equilibrium_equations(rng):
    for _ in range(50):
        p = random_long_params(rng, rc_target=rng.uniform(1.05, 5))
        s = endemic_long(p)
        assert s.S / p.S0 * rc_long(p) - 1 == pytest.approx(0, abs=1e-12)
        assert p.q1 + p.d == pytest.approx(p.p * p.c * s.E / s.I - p.r1, rel=1e-9)
        assert p.q2 + p.d == pytest.approx((1 - p.p) * p.c * s.E / s.A - p.r2, rel=1e-9)
        assert p.lam == pytest.approx(p.d * s.S + (p.c + p.d) * s.E, rel=1e-9)


def test_endemic_boundary(india):
    for excess in (1e-3, 1e-6):
        p = india.with_values(beta=india.beta * (1 + excess) / rc_long(india))
        s = endemic_long(p)
        assert s.E / india.lam < 2 * excess
        assert s.S == pytest.approx(p.S0, rel=2 * excess)
    with pytest.raises(NoEndemicEquilibrium):
        endemic_long(india.with_values(beta=india.beta * 0.9 / rc_long(india)))


def test_persistence_india(india):
    b = persistence_bounds(india, 0.5)
    assert b.s_bar == pytest.approx(1.9306e9, rel=1e-4)
    assert b.s_breve == pytest.approx(1.9325e9, rel=1e-4)
    assert b.s_breve > b.s_bar > b.s_star
    b = persistence_bounds(india, 0.99)
    assert b.s_breve > b.s_bar
    b = persistence_bounds(india, 1e-9)
    assert b.s_bar == pytest.approx(india.S0, rel=1e-9)
    assert b.s_breve == pytest.approx(india.S0, rel=1e-9)
    for theta in (0.0, 1.0, -0.2):
        with pytest.raises(InvalidTheta):
            persistence_bounds(india, theta)


def test_persistence_forms_agree(rng):
    for _ in range(100):
        p = random_long_params(rng, rc_target=rng.uniform(1.01, 6))
        b = persistence_bounds(p, rng.uniform(0.01, 0.99))
        assert b.s_bar_rate == pytest.approx(b.s_bar, rel=1e-10)
        assert b.s_breve_rate == pytest.approx(b.s_breve, rel=1e-10)
        assert b.s_breve > b.s_bar > b.s_star


def test_jacobian_matches_limiting_analytic(rng, india):
    points = [disease_free_long(india), endemic_long(india)]
    for p, x in [(india, pt) for pt in points] + [
        (q, endemic_long(q)) for q in (random_long_params(rng, 2.0) for _ in range(5))
    ]:
        numeric = jacobian(p, ModelKind.LIMITING, x)
        exact = limiting_jacobian(p, x)
        np.testing.assert_allclose(numeric, exact, rtol=1e-6, atol=1e-9 * np.abs(exact).max())


def test_jacobian_short_zero_columns(nanjing):
    x = disease_free_short(9e6, 8e6)
    J = jacobian(nanjing, ModelKind.SHORT, x)
    assert np.all(J[:, 5] == 0)
    assert np.all(J[5, [0, 5]] == 0) and np.all(J[0, [0, 5]] == 0)
    eig = np.linalg.eigvals(J)
    assert np.sum(np.abs(eig) < 1e-12) == 2
    assert np.any(np.isclose(eig, -nanjing.r3, rtol=1e-6))


def test_stability_india(india):
    report = classify_stability(india, ModelKind.LONG, endemic_long(india))
    assert report.classification is Stability.STABLE
    eig = np.array(report.eigenvalues)
    for target in (-india.d, -(india.r3 + india.d)):
        assert np.min(np.abs(eig - target)) <= 1e-4 * abs(target)
    assert classify_stability(india, ModelKind.LONG, disease_free_long(india)).classification is Stability.UNSTABLE


def test_stability_nanjing_marginal(nanjing, nanjing_x0):
    report = classify_stability(nanjing, ModelKind.SHORT, disease_free_short(nanjing_x0.N))
    assert report.classification is Stability.MARGINAL
    assert report.max_real_part <= 1e-7


def test_stability_dichotomy_at_v0(rng):
    for target, label in ((0.5, Stability.STABLE), (1.5, Stability.UNSTABLE)):
        for _ in range(50):
            p = random_long_params(rng, rc_target=target)
            r = classify_stability(p, ModelKind.LONG, disease_free_long(p))
            assert r.classification is label


def test_not_an_equilibrium(india, india_x0):
    with pytest.raises(NotAnEquilibrium):
        classify_stability(india, ModelKind.LONG, india_x0)


def test_short_cubic_matches_charpoly(rng):
    for _ in range(25):
        p = random_short_params(rng, rc_target=rng.uniform(0.2, 4))
        n, s = 1e6, rng.uniform(0.3, 1.0) * 1e6
        J = jacobian(p, ModelKind.SHORT, disease_free_short(n, s))
        block = J[1:4, 1:4]
        coeffs = np.poly(block)
        assert np.allclose(coeffs[1:], short_char_coeffs(p, s, n), rtol=1e-5, atol=1e-9)


def test_short_cubic_signs(nanjing, rng):
    assert short_char_coeffs(nanjing)[2] > 0
    p = random_short_params(rng, rc_target=1.0)
    assert short_char_coeffs(p)[2] == pytest.approx(0.0, abs=1e-12)
    p = random_short_params(rng, rc_target=2.0)
    a1, a2, a3 = short_char_coeffs(p)
    assert a3 < 0
    roots = np.roots([1, a1, a2, a3])
    assert any(abs(r.imag) < 1e-12 and r.real > 0 for r in roots)


def test_g_accuracy():
    for x in (1e-300, 1e-8, 0.3, 0.5, 0.999, 1 - 1e-9, 1.0, 1 + 1e-12, 1.0005, 2.0, 1e6):
        with mpmath.workdps(60):
            exact = float(mpmath.mpf(x) - 1 - mpmath.log(x))
        assert g(x) == pytest.approx(exact, rel=1e-12, abs=1e-300)
    with pytest.raises(DomainError):
        g(0.0)


def test_lyapunov_v0_values(india):
    v0 = disease_free_long(india)
    assert lyapunov_v0(india, v0) == 0.0
    assert lyapunov_v0(india, v0._replace(E=10.0)) == 10.0
    assert lyapunov_v0(india, v0._replace(S=0.5 * india.S0)) > 0
    with pytest.raises(DomainError):
        lyapunov_v0(india, v0._replace(S=0.0))


def test_lyapunov_vstar_values(india):
    star = endemic_long(india)
    assert lyapunov_vstar(india, star) == 0.0
    halved = lyapunov_vstar(india, star._replace(S=star.S / 2))
    assert halved == pytest.approx(star.S * (0.5 - 1 + math.log(2)), rel=1e-12)
    assert halved == pytest.approx(0.1931 * star.S, rel=1e-3)
    assert lyapunov_vstar(india, star._replace(I=star.I * 3, A=star.A / 2)) > 0
    with pytest.raises(DomainError):
        lyapunov_vstar(india, star._replace(A=0.0))
    with pytest.raises(NoEndemicEquilibrium):
        lyapunov_vstar(india.with_values(beta=0.1), star)
