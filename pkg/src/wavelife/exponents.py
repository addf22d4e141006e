"""Critical exponents, damping classification and lifespan-rate algebra.

Everything here is a pure function of scalar parameters.  The Strauss
exponent for ``n = 1`` is the float ``math.inf``; comparisons against it are
exact.
"""

from __future__ import annotations

import enum
import math
import sys
from dataclasses import dataclass
from typing import NamedTuple

from scipy import optimize

THEOREMS = ("thm1", "thm2", "thm3")


@dataclass(frozen=True)
class ProblemParams:
    """Scalar parameters of the damped semilinear Cauchy problem.

    ``mu1`` multiplies the damping ``u_t/(1+t)**beta`` and ``mu2`` the
    negative mass ``u/(1+t)**(alpha+1)``; ``eps`` scales the data, which is
    supported in ``|x| <= R``.
    """

    n: int
    p: float
    mu1: float = 1.0
    mu2: float = 1.0
    alpha: float = 2.0
    beta: float = 2.0
    R: float = 1.0
    eps: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not self.R >= 1:
            raise ValueError(f"R must be at least 1, got {self.R}")
        if self.mu1 < 0 or self.mu2 < 0:
            raise ValueError("mu1 and mu2 must be nonnegative")

    @property
    def scattering(self) -> bool:
        return self.alpha > 1 and self.beta > 1

    def require_scattering(self):
        if not self.scattering:
            raise ValueError(
                f"scattering regime needs alpha > 1 and beta > 1, "
                f"got alpha={self.alpha}, beta={self.beta}"
            )

    def replace(self, **changes) -> "ProblemParams":
        fields = dict(self.__dict__)
        fields.update(changes)
        return ProblemParams(**fields)


def gamma(p, n):
    return 2 + (n + 1) * p - (n - 1) * p**2


def strauss_exponent(n) -> float:
    """Positive root of ``gamma(., n)``; ``inf`` in one dimension."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if n == 1:
        return math.inf
    return (n + 1 + math.sqrt(n * n + 10 * n - 7)) / (2 * (n - 1))


def fujita_exponent(n) -> float:
    if not n > 0:
        raise ValueError(f"effective dimension must be positive, got {n}")
    return 1 + 2 / n


def delta_scale_invariant(mu1, mu2):
    return (mu1 - 1) ** 2 - 4 * mu2**2


def critical_power_scale_invariant(n, mu1, mu2) -> float:
    """Blow-up threshold for scale-invariant damping with positive mass.

    Only defined for ``delta`` in ``(0, 1]``; other values raise
    ``ValueError`` rather than extrapolating.
    """
    delta = delta_scale_invariant(mu1, mu2)
    if not 0 < delta <= 1:
        raise ValueError(f"delta={delta!r} is outside (0, 1]")
    return max(
        strauss_exponent(n + mu1),
        fujita_exponent(n + mu1 / 2 - math.sqrt(delta) / 2),
    )


def mass_transform_coefficient(t, mu1, mu2):
    """Mass coefficient after the substitution ``v = (1+t)**(mu1/2) u``."""
    delta = delta_scale_invariant(mu1, mu2)
    return (1 - delta) / (4 * (1 + t) ** 2)


class Damping(enum.Enum):
    OVERDAMPING = "overdamping"
    EFFECTIVE = "effective"
    SCALING_INVARIANT = "scaling-invariant"
    SCATTERING = "scattering"


class DampingClass(NamedTuple):
    kind: Damping
    non_effective: bool = False

    def __str__(self):
        return self.kind.value + (", non-effective" if self.non_effective else "")


def classify_damping(beta, mu) -> DampingClass:
    if beta < -1:
        return DampingClass(Damping.OVERDAMPING)
    if beta < 1:
        return DampingClass(Damping.EFFECTIVE)
    if beta == 1:
        return DampingClass(Damping.SCALING_INVARIANT, 0 < mu < 1)
    return DampingClass(Damping.SCATTERING)


def lifespan_exponent(p, n, theorem="thm1") -> float:
    """Power of ``1/eps`` in the lifespan upper bound of the given theorem.

    ``thm1`` is the general bound ``2p(p-1)/gamma``, ``thm2`` the improved
    two-dimensional rate for ``1 < p < 2`` and ``thm3`` the improved
    one-dimensional rate.
    """
    if theorem == "thm1":
        if not 1 < p < strauss_exponent(n):
            raise ValueError(f"thm1 needs 1 < p < p_S({n}), got p={p}")
        return 2 * p * (p - 1) / gamma(p, n)
    if theorem == "thm2":
        if n != 2 or not 1 < p < 2:
            raise ValueError(f"thm2 needs n=2 and 1 < p < 2, got n={n}, p={p}")
        return (p - 1) / (3 - p)
    if theorem == "thm3":
        if n != 1 or not p > 1:
            raise ValueError(f"thm3 needs n=1 and p > 1, got n={n}, p={p}")
        return (p - 1) / 2
    raise ValueError(f"unknown theorem {theorem!r}; expected one of {THEOREMS}")


def a_residual(a, eps):
    return a * a * eps * eps * math.log1p(a) - 1


def solve_a_of_eps(eps) -> float:
    """Unique ``a > 0`` with ``a**2 eps**2 log(1+a) = 1``."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    hi = 1.0
    while a_residual(hi, eps) < 0:
        hi *= 2
    return optimize.brentq(
        a_residual, 0.0, hi, args=(eps,), xtol=1e-300, rtol=4 * sys.float_info.epsilon, maxiter=500
    )


@dataclass(frozen=True)
class QProfile:
    """Coefficient ``Q`` of the transformed ``n = p = 2`` problem."""

    mu1: float
    mu2: float
    alpha: float
    beta: float

    @classmethod
    def from_params(cls, params: ProblemParams) -> "QProfile":
        return cls(params.mu1, params.mu2, params.alpha, params.beta)

    def q_tilde(self, t):
        s = 1 + t
        return (
            self.mu1**2 / (4 * s ** (self.beta - 1))
            - self.beta * self.mu1 / 2
            + self.mu2 / s ** (self.alpha - self.beta)
        )

    def q(self, t):
        s = 1 + t
        return (
            self.mu1**2 / (4 * s ** (2 * self.beta))
            - self.beta * self.mu1 / (2 * s ** (self.beta + 1))
            + self.mu2 / s ** (self.alpha + 1)
        )

    @property
    def t0(self) -> float | None:
        """Stationary point of ``q_tilde`` in ``t``; ``None`` unless alpha < beta."""
        if not self.alpha < self.beta or self.mu2 <= 0:
            return None
        ratio = self.mu1**2 * (self.beta - 1) / (4 * self.mu2 * (self.beta - self.alpha))
        return -1 + ratio ** (1 / (2 * self.beta - self.alpha - 1))


def q_tilde(t, params: ProblemParams):
    return QProfile.from_params(params).q_tilde(t)


def q(t, params: ProblemParams):
    return QProfile.from_params(params).q(t)


def thm4_mu2_threshold(mu1, alpha, beta) -> float:
    """Smallest ``mu2`` for which ``q_tilde`` is nonnegative at its stationary point.

    For ``alpha < beta`` this is the closed-form rearrangement of
    ``q_tilde(t0) >= 0``; for ``alpha == beta`` it is ``beta*mu1/2``.
    """
    if alpha > beta:
        raise ValueError("no positive-Q regime for alpha > beta")
    if alpha == beta:
        return beta * mu1 / 2
    if mu1 == 0:
        return 0.0
    k = 2 * beta - alpha - 1
    d = beta - alpha
    return mu1**2 * (beta - 1) / (4 * d) * (2 * beta * d / (mu1 * k)) ** (k / (beta - 1))


def thm4_condition(params: ProblemParams) -> bool:
    if params.alpha > params.beta:
        raise ValueError(
            f"condition requires alpha <= beta, got alpha={params.alpha}, beta={params.beta}"
        )
    return params.mu2 >= thm4_mu2_threshold(params.mu1, params.alpha, params.beta)
