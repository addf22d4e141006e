import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavelife.special import (
    empirical_c1,
    lambda_of_t,
    log_phi1,
    m_of_t,
    m_prime,
    phi1,
    phi1_quadrature,
    psi1,
    yz_exponent,
    yz_lemma_check,
)


def test_multiplier_values():
    assert m_of_t(0.0, 1.0, 2.0) == pytest.approx(math.exp(-1), rel=1e-15)
    assert m_of_t(1e8, 1.0, 2.0) > 1 - 1e-6
    assert np.all(m_of_t(np.linspace(0, 50, 11), 0.0, 3.0) == 1.0)
    with pytest.raises(ValueError):
        m_of_t(0.0, 1.0, 1.0)


def test_multiplier_bounds_and_monotone():
    t = np.linspace(0, 100, 1001)
    m = m_of_t(t, 1.5, 2.5)
    assert np.all(m <= 1) and np.all(m >= m[0]) and np.all(np.diff(m) > 0)


@settings(max_examples=100)
@given(st.floats(0, 1e3), st.floats(0, 5), st.floats(1.01, 5))
def test_lambda_squared_is_m(t, mu1, beta):
    assert abs(lambda_of_t(t, mu1, beta) ** 2 - m_of_t(t, mu1, beta)) < 1e-14


def test_m_prime_finite_difference():
    h = 1e-5
    for mu1, beta in [(1, 2), (0.3, 1.5), (3, 4)]:
        for t in (0.1, 1.0, 7.0, 40.0):
            fd = (m_of_t(t + h, mu1, beta) - m_of_t(t - h, mu1, beta)) / (2 * h)
            assert fd == pytest.approx(m_prime(t, mu1, beta), rel=1e-6)
            assert m_prime(t, mu1, beta) > 0


def test_phi1_values():
    assert phi1(0.0, 1) == 2
    assert phi1(0.0, 2) == pytest.approx(2 * math.pi, rel=1e-15)
    assert phi1(1.0, 3) == pytest.approx(4 * math.pi * math.sinh(1), rel=1e-15)
    assert phi1(1.0, 3) == pytest.approx(14.7681, abs=1e-4)
    assert phi1(0.0, 3) == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_phi1_matches_sphere_quadrature(n):
    for r in np.linspace(0, 20, 41):
        assert phi1(r, n) == pytest.approx(phi1_quadrature(r, n), rel=1e-8)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_log_phi1(n):
    r = np.linspace(0, 30, 301)
    assert np.allclose(log_phi1(r, n), np.log(phi1(r, n)), rtol=0, atol=1e-13 * (1 + r))
    assert np.isfinite(log_phi1(np.array([800.0, 5000.0]), n)).all()


@pytest.mark.parametrize("n", [1, 2, 3])
def test_eigenfunction_identity(n):
    h = 1e-4
    for r in np.linspace(0.1, 10, 34):
        d2 = (phi1(r + h, n) - 2 * phi1(r, n) + phi1(r - h, n)) / h**2
        d1 = (phi1(r + h, n) - phi1(r - h, n)) / (2 * h)
        assert d2 + (n - 1) / r * d1 == pytest.approx(phi1(r, n), rel=1e-6)


def test_psi1():
    assert psi1(0.0, 0.0, 1) == 2
    assert psi1(1.0, 1.0, 3) == pytest.approx(math.exp(-1) * 4 * math.pi * math.sinh(1), rel=1e-15)
    assert psi1(1.0, 1.0, 3) == pytest.approx(5.4327, abs=2e-4)  # quoted value is truncated
    for t, s in [(0.0, 1.0), (2.0, 0.5)]:
        assert psi1(3.0, t + s, 2) == pytest.approx(math.exp(-s) * psi1(3.0, t, 2), rel=1e-14)


def test_psi1_solves_free_wave():
    # psi_tt = psi and Delta psi = psi, so psi_tt = Delta psi
    h = 1e-4
    r, t, n = 2.0, 1.5, 3
    ptt = (psi1(r, t + h, n) - 2 * psi1(r, t, n) + psi1(r, t - h, n)) / h**2
    lap = (psi1(r + h, t, n) - 2 * psi1(r, t, n) + psi1(r - h, t, n)) / h**2 + (n - 1) / r * (
        psi1(r + h, t, n) - psi1(r - h, t, n)
    ) / (2 * h)
    assert ptt == pytest.approx(lap, rel=1e-6)


def test_yz_exponent():
    assert yz_exponent(2, 2) == 0
    assert yz_exponent(2, 1) == 0
    assert yz_exponent(2, 3) == 0
    assert yz_exponent(3, 2) == pytest.approx(0.25)


@pytest.mark.parametrize("n,p", [(1, 2), (2, 2), (3, 1.5), (2, 3)])
def test_yz_positive_at_zero(n, p):
    lhs, ratio = yz_lemma_check(0.0, p, n, 1.0)
    assert math.isfinite(lhs) and lhs > 0 and ratio == lhs


def test_yz_matches_direct_quadrature():
    from scipy import integrate

    for n, p, t in [(1, 2, 3.0), (2, 2, 5.0), (3, 3, 2.0)]:
        q = p / (p - 1)
        sigma = {1: 2, 2: 2 * math.pi, 3: 4 * math.pi}[n]
        direct, _ = integrate.quad(
            lambda r: sigma * r ** (n - 1) * psi1(r, t, n) ** q, 0, t + 1, epsrel=1e-12, limit=200
        )
        assert yz_lemma_check(t, p, n, 1.0)[0] == pytest.approx(direct, rel=1e-9)


def test_yz_bounded_n2_p2():
    ratios = [yz_lemma_check(float(t), 2, 2, 1.0)[1] for t in np.linspace(0, 100, 101)]
    assert max(ratios) < 2 * ratios[0] + 100


def test_yz_envelope_n3():
    grid = np.linspace(0, 50, 201)
    sup = max(yz_lemma_check(float(t), 2, 3, 1.0)[1] for t in grid)
    assert yz_lemma_check(50.0, 2, 3, 1.0)[1] <= sup * (1 + 1e-9)


def test_yz_no_overflow_at_large_t():
    lhs, ratio = yz_lemma_check(900.0, 2, 3, 1.0)
    assert math.isfinite(lhs) and ratio > 0
    with pytest.raises(ValueError):
        yz_lemma_check(-1.0, 2, 2, 1.0)


def test_empirical_c1_is_grid_sup():
    c1 = empirical_c1(1, 2.0, 1.0)
    assert c1 >= yz_lemma_check(10.0, 2.0, 1, 1.0)[1]
    assert c1 >= yz_lemma_check(0.0, 2.0, 1, 1.0)[1]
    assert math.isfinite(c1)
