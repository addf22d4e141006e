"""Iteration frames: the bootstrapped lower bounds ``F0 >= D_j (1+t)^-a_j (t-1)^b_j``.

The standard frame starts from the ``(t-1)^(n+1)`` bound and yields the
general lifespan rate ``eps^(-2p(p-1)/gamma)``; the improved frame starts
from the ``t^(p+2)`` bound (``n = 1, 2`` with ``int g != 0``) and yields the
low-dimensional rates.  All constants are carried as logarithms because
``C7`` overflows for ``p`` near 1 or near the Strauss exponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .exponents import gamma, lifespan_exponent, strauss_exponent

LOG2 = math.log(2.0)


def sp_partial(p, C, j):
    """``sum_{k=1}^{j-1} (2k log p - log C) / p^k``."""
    lp, lc = math.log(p), math.log(C)
    return math.fsum((2 * k * lp - lc) / p**k for k in range(1, j))


def sp_limit(p, C):
    """Limit of :func:`sp_partial` as ``j -> inf``: ``(2p log p)/(p-1)^2 - log C/(p-1)``."""
    if not p > 1 or not C > 0:
        raise ValueError("need p > 1 and C > 0")
    return 2 * p * math.log(p) / (p - 1) ** 2 - math.log(C) / (p - 1)


class LifespanBound(NamedTuple):
    log_T: float
    log_eps0: float
    exponent: float
    asserted: bool

    @property
    def T_bound(self) -> float:
        return math.exp(self.log_T) if self.log_T < 709 else math.inf

    @property
    def eps0(self) -> float:
        return math.exp(self.log_eps0) if self.log_eps0 < 709 else math.inf


@dataclass(frozen=True)
class IterationFrame:
    """One iteration argument with all its constants.

    ``log_seed`` is ``log(C4/(n(n+1)))`` (standard) or ``log C10``
    (improved), so that ``log D_1 = log_seed + p log eps``; ``C`` is the
    recurrence constant ``C5`` or ``C11``.
    """

    p: float
    n: int
    variant: str
    eps: float
    log_seed: float
    C: float
    C3: float

    @classmethod
    def standard(cls, p, n, eps, C3, C4) -> "IterationFrame":
        if not 1 < p < strauss_exponent(n):
            raise ValueError(f"standard frame needs 1 < p < p_S({n})")
        C5 = C3 / (n + 1 + 2 / (p - 1)) ** 2
        return cls(p, n, "standard", eps, math.log(C4) - math.log(n * (n + 1)), C5, C3)

    @classmethod
    def improved(cls, p, n, eps, C3, C10) -> "IterationFrame":
        theorem = {1: "thm3", 2: "thm2"}.get(n)
        if theorem is None:
            raise ValueError("improved frame exists only for n = 1, 2")
        lifespan_exponent(p, n, theorem)
        C11 = C3 * (p - 1) ** 2 / (p * (p + 1)) ** 2
        return cls(p, n, "improved", eps, math.log(C10), C11, C3)

    @classmethod
    def from_constants(cls, params, constants, variant="standard") -> "IterationFrame":
        if variant == "standard":
            return cls.standard(params.p, params.n, params.eps, constants.C3, constants.C4)
        return cls.improved(params.p, params.n, params.eps, constants.C3, constants.C10)

    def with_eps(self, eps) -> "IterationFrame":
        return IterationFrame(self.p, self.n, self.variant, eps, self.log_seed, self.C, self.C3)

    @property
    def log_D1(self) -> float:
        return self.log_seed + self.p * math.log(self.eps)

    @property
    def a1(self) -> float:
        return self.closed_a(1)

    @property
    def b1(self) -> float:
        return self.closed_b(1)

    @property
    def S_inf(self) -> float:
        return sp_limit(self.p, self.C)

    def closed_a(self, j):
        p, n = self.p, self.n
        if self.variant == "standard":
            return p ** (j - 1) * ((n - 1) * p / 2 + n) - n
        return n * p**j - n

    def closed_b(self, j):
        p, n = self.p, self.n
        if self.variant == "standard":
            return p ** (j - 1) * (n + 1 + 2 / (p - 1)) - 2 / (p - 1)
        return (p + 1) / (p - 1) * p**j - 2 / (p - 1)

    def recurrence(self, jmax):
        """``(a_j, b_j)`` for ``j = 1..jmax`` built from ``a_{j+1} = p a_j + n(p-1)``, ``b_{j+1} = p b_j + 2``."""
        a, b = [self.closed_a(1)], [self.closed_b(1)]
        for _ in range(jmax - 1):
            a.append(self.p * a[-1] + self.n * (self.p - 1))
            b.append(self.p * b[-1] + 2)
        return a, b

    def log_D_bound(self, j):
        """``p^(j-1) (log D_1 - S_p(j))``."""
        return self.p ** (j - 1) * (self.log_D1 - sp_partial(self.p, self.C, j))

    def log_D_propagated(self, jmax):
        """``log D_j`` with equality in ``D_{j+1} = C D_j^p / p^(2j)``, ``j = 1..jmax``."""
        out = [self.log_D1]
        lc, lp = math.log(self.C), math.log(self.p)
        for j in range(1, jmax):
            out.append(self.p * out[-1] + lc - 2 * j * lp)
        return out

    def log_D_exact(self, jmax):
        """``log D_j`` with equality in ``D_{j+1} = C3 D_j^p / (p b_j + 2)^2``."""
        out = [self.log_D1]
        lc3 = math.log(self.C3)
        for j in range(1, jmax):
            out.append(self.p * out[-1] + lc3 - 2 * math.log(self.p * self.closed_b(j) + 2))
        return out

    @property
    def gamma(self):
        return gamma(self.p, self.n)

    @property
    def rate(self) -> float:
        """Power of ``1/eps`` in the predicted lifespan."""
        p = self.p
        if self.variant == "standard":
            return 2 * p * (p - 1) / self.gamma
        return p * (p - 1) / (self.gamma - 2)

    @property
    def C_tail(self) -> float:
        """``C6`` (standard) or ``C12`` (improved)."""
        p, n = self.p, self.n
        if self.variant == "standard":
            return ((n - 1) * p / 2 + 2 * n + 1 + 2 / (p - 1)) * LOG2 + self.S_inf
        return self.S_inf + n * p * LOG2

    @property
    def log_C7(self) -> float:
        """Log of the lifespan prefactor (``C7`` for the standard frame)."""
        p = self.p
        if self.variant == "standard":
            return 2 * (p - 1) / self.gamma * (self.C_tail + 1 - self.log_seed)
        return (p - 1) / (self.gamma - 2) * (self.C_tail + 1 - self.log_seed)

    @property
    def log_eps0(self) -> float:
        """Largest ``log eps`` for which the bound's ``t >= 2`` (``t >= 1`` improved) hypothesis holds."""
        t_min = LOG2 if self.variant == "standard" else 0.0
        return (self.log_C7 - t_min) / self.rate

    def log_J_lower(self, log_t):
        """Lower bound for ``J`` valid for ``t >= 2`` (``t >= 1`` improved), as a function of ``log t``."""
        p = self.p
        k = self.gamma / (2 * (p - 1)) if self.variant == "standard" else (self.gamma - 2) / (p - 1)
        return k * log_t + self.log_D1 - self.C_tail

    def J_from_log_t(self, log_t):
        p, n = self.p, self.n
        t = math.exp(log_t) if log_t < 700 else math.inf
        log1pt = log_t + math.log1p(math.exp(-log_t))
        if self.variant == "standard":
            if not t > 1:
                raise ValueError("J is defined for t > 1")
            logtm1 = log_t + math.log1p(-math.exp(-log_t))
            return (
                -((n - 1) * p / 2 + n) * log1pt
                + (n + 1 + 2 / (p - 1)) * logtm1
                + self.log_D1
                - self.S_inf
            )
        return -n * p * log1pt + p * (p + 1) / (p - 1) * log_t + self.log_D1 - self.S_inf


def sequences(frame: IterationFrame, j):
    """``(a_j, b_j, lower bound for log D_j)``."""
    if j < 1:
        raise ValueError("j starts at 1")
    return frame.closed_a(j), frame.closed_b(j), frame.log_D_bound(j)


def J_of_t(frame: IterationFrame, t):
    if frame.variant != "standard":
        raise ValueError("J belongs to the standard frame; use J_tilde_of_t")
    if not t > 1:
        raise ValueError(f"J is defined for t > 1, got {t}")
    return frame.J_from_log_t(math.log(t))


def J_tilde_of_t(frame: IterationFrame, t):
    if frame.variant != "improved":
        raise ValueError("J~ belongs to the improved frame; use J_of_t")
    if not t > 0:
        raise ValueError(f"J~ is defined for t > 0, got {t}")
    return frame.J_from_log_t(math.log(t))


def predicted_lifespan(frame: IterationFrame, eps=None) -> LifespanBound:
    """``T <= C7 eps^-rate``; ``asserted`` is False when ``eps > eps0``."""
    eps = frame.eps if eps is None else eps
    log_T = frame.log_C7 - frame.rate * math.log(eps)
    return LifespanBound(log_T, frame.log_eps0, frame.rate, math.log(eps) <= frame.log_eps0 + 1e-12)
