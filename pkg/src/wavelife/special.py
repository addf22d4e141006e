"""Damping multipliers and the exponential test functions.

``phi1`` is the radial eigenfunction ``Delta phi1 = phi1`` built by averaging
``exp(x . omega)`` over the unit sphere; ``psi1 = exp(-t) phi1`` then solves
the free wave equation.  Closed forms are used for evaluation and the sphere
integral itself (by adaptive quadrature) serves as the cross-check.
"""

from __future__ import annotations

import functools
import math

import numpy as np
from scipy import integrate, special

SURFACE_AREA = {1: 2.0, 2: 2 * math.pi, 3: 4 * math.pi}
UNIT_BALL_VOLUME = {1: 2.0, 2: math.pi, 3: 4 * math.pi / 3}


def m_of_t(t, mu1, beta):
    """exp(mu1 (1+t)**(1-beta) / (1-beta)), increasing from m(0) to 1."""
    if not beta > 1:
        raise ValueError(f"beta must exceed 1, got {beta}")
    return np.exp(mu1 * (1 + np.asarray(t, dtype=float)) ** (1 - beta) / (1 - beta))


def lambda_of_t(t, mu1, beta):
    """Half-power multiplier; lambda(t)**2 == m(t)."""
    return m_of_t(t, mu1 / 2, beta)


def m_prime(t, mu1, beta):
    return mu1 * (1 + np.asarray(t, dtype=float)) ** (-beta) * m_of_t(t, mu1, beta)


def _i0_series(r):
    r = np.asarray(r, dtype=float)
    x = (r / 2) ** 2
    term = np.ones_like(x)
    total = np.ones_like(x)
    k = 0
    while True:
        k += 1
        term = term * x / (k * k)
        total = total + term
        if np.all(term <= 1e-17 * total):
            return total


def phi1(r, n):
    """Closed-form ``phi1`` at radius ``r`` (2 cosh, 2 pi I0, 4 pi sinh(r)/r)."""
    r = np.asarray(r, dtype=float)
    if n == 1:
        return 2 * np.cosh(r)
    if n == 2:
        return 2 * math.pi * _i0_series(r)
    if n == 3:
        safe = np.where(r == 0, 1.0, r)
        return np.where(r == 0, 4 * math.pi, 4 * math.pi * np.sinh(safe) / safe)
    raise ValueError(f"phi1 is implemented for n in 1..3, got {n}")


def log_phi1(r, n):
    """``log(phi1(r))`` without overflow for large radii."""
    r = np.asarray(r, dtype=float)
    if n == 1:
        return r + np.log1p(np.exp(-2 * r))
    if n == 2:
        return math.log(2 * math.pi) + r + np.log(special.i0e(r))
    if n == 3:
        safe = np.where(r == 0, 1.0, r)
        # sinh(r)/r = exp(r) (1 - exp(-2r)) / (2r)
        big = r - np.log(2 * safe) + np.log1p(-np.exp(-2 * safe))
        small = np.log(np.sinh(np.minimum(safe, 1.0)) / np.minimum(safe, 1.0))
        val = np.where(r > 1.0, big, small)
        return math.log(4 * math.pi) + np.where(r == 0, 0.0, val)
    raise ValueError(f"phi1 is implemented for n in 1..3, got {n}")


def phi1_quadrature(r, n):
    """Integrate exp(r omega_1) over the unit sphere S^(n-1) directly."""
    r = float(r)
    if n == 1:
        # S^0 = {-1, +1} with counting measure
        return math.exp(r) + math.exp(-r)
    opts = dict(epsabs=0.0, epsrel=1e-13, limit=200)
    if n == 2:
        val, _ = integrate.quad(lambda th: math.exp(r * math.cos(th)), 0.0, 2 * math.pi, **opts)
        return val
    if n == 3:
        val, _ = integrate.quad(
            lambda th: math.exp(r * math.cos(th)) * math.sin(th), 0.0, math.pi, **opts
        )
        return 2 * math.pi * val
    raise ValueError(f"phi1 is implemented for n in 1..3, got {n}")


def psi1(r, t, n):
    return np.exp(-np.asarray(t, dtype=float)) * phi1(r, n)


def yz_exponent(p, n):
    """Power of (1+t) bounding the ``psi1**(p/(p-1))`` integral over the cone."""
    return (n - 1) * (1 - p / (2 * (p - 1)))


def yz_lemma_check(t, p, n, R):
    """Integral of ``psi1**(p/(p-1))`` over ``|x| <= t+R`` and its normalized ratio.

    The integrand is formed in log space, so ``phi1`` never overflows even
    when ``t + R`` is in the hundreds.  Returns ``(lhs, ratio)`` with
    ``ratio = lhs / (1+t)**yz_exponent(p, n)``.
    """
    if t < 0 or not p > 1 or R < 1:
        raise ValueError("need t >= 0, p > 1, R >= 1")
    q = p / (p - 1)
    L = t + R
    sigma = SURFACE_AREA[n]

    def integrand(r):
        if r == 0:
            return sigma * math.exp(q * (float(log_phi1(0.0, n)) - t)) if n == 1 else 0.0
        return sigma * math.exp(q * (float(log_phi1(r, n)) - t) + (n - 1) * math.log(r))

    # mass concentrates within a few 1/q of the outer radius
    edge = max(0.0, L - 40.0 / q)
    points = [edge] if 0 < edge < L else None
    lhs, _ = integrate.quad(integrand, 0.0, L, epsabs=0.0, epsrel=1e-11, limit=400, points=points)
    if not math.isfinite(lhs):
        raise FloatingPointError(f"weighted test-function integrand overflowed at t={t}")
    return lhs, lhs / (1 + t) ** yz_exponent(p, n)


@functools.lru_cache(maxsize=64)
def empirical_c1(n, p, R, t_max=1e3, num=240):
    """Grid supremum of the normalized test-function ratio over ``t in [0, t_max]``."""
    grid = np.concatenate([[0.0], np.geomspace(1e-3, t_max, num - 1)])
    return max(yz_lemma_check(float(t), p, n, R)[1] for t in grid)
