"""Integral functionals along a computed solution and the inequalities they obey.

``track`` turns a :class:`~wavelife.solver.SolutionTrace` into time series of

* ``F0 = int u dx`` and ``F0prime = int u_t dx``,
* ``F1 = int u psi1 dx`` with ``psi1 = exp(-t) phi1``,
* ``W = int lambda(t) u dx`` and ``Lp = int |u|**p dx``.

The ``verify_*`` functions evaluate each lower bound of the blow-up argument
on those series and wrap the outcome in an :class:`InequalityVerdict`.  A
verdict's tolerance is ten times the sum of a quadrature error estimate
(the same integral on every other node) and a discretization error estimate
(the same check on a half-resolution rerun, when one is supplied).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .exponents import ProblemParams, thm4_condition
from .solver import SolutionTrace, quadrature_weights
from .special import (
    SURFACE_AREA,
    UNIT_BALL_VOLUME,
    empirical_c1,
    lambda_of_t,
    log_phi1,
    m_of_t,
)

STOP_FRACTION = 0.9
F1_FACTOR = (1 - math.exp(-2)) / 2


class PreconditionError(ValueError):
    """A bound was requested for data that does not meet its hypotheses."""


@dataclass
class FunctionalTrace:
    params: ProblemParams
    times: np.ndarray
    F0: np.ndarray
    F0prime: np.ndarray
    F1: np.ndarray
    F1prime: np.ndarray
    W: np.ndarray
    Lp: np.ndarray
    mode: str
    t_stop: float
    blew_up: bool
    f_nonzero: bool = False
    # same integrals with every other node, for the quadrature error estimate
    half: dict = field(default_factory=dict, repr=False)


@dataclass
class InequalityVerdict:
    name: str
    n_times: int
    margin: float
    tol: float
    passed: bool
    vacuous: bool = False
    note: str = ""

    def row(self):
        return [self.name, repr(self.margin), repr(self.tol), "pass" if self.passed else "FAIL"]


def _integrals(trace: SolutionTrace, stride: int):
    params = trace.params
    n, p = params.n, params.p
    r = trace.r[::stride]
    u = trace.u[:, ::stride]
    v = trace.v[:, ::stride]
    w = quadrature_weights(r, n)
    t = trace.times
    # phi1 * exp(-t) assembled in log space, one row per snapshot
    psi = np.exp(log_phi1(r, n)[None, :] - t[:, None])
    F0 = u @ w
    return dict(
        F0=F0,
        F0prime=v @ w,
        F1=(u * psi) @ w,
        F1prime=((v - u) * psi) @ w,
        W=(lambda_of_t(t, params.mu1, params.beta)[:, None] * u) @ w if params.beta > 1 else F0,
        Lp=(np.abs(u) ** p) @ w,
    )


def track(trace: SolutionTrace, params: ProblemParams | None = None) -> FunctionalTrace:
    """Functionals of every snapshot in ``trace``."""
    params = params or trace.params
    full = _integrals(trace, 1)
    half = _integrals(trace, 2) if trace.r.size > 8 else {}
    rep = trace.report
    t_stop = STOP_FRACTION * rep.T_num if rep.blew_up else rep.T_num
    return FunctionalTrace(
        params=params,
        times=trace.times.copy(),
        mode=trace.mode,
        t_stop=t_stop,
        blew_up=rep.blew_up,
        f_nonzero=trace.data is not None and not trace.data.f_is_zero,
        half=half,
        **full,
    )


def _coefficients(params: ProblemParams, t, mode):
    if mode == "free":
        return np.zeros_like(t), np.zeros_like(t)
    damping = params.mu1 * (1 + t) ** (-params.beta)
    mass = params.mu2 * (1 + t) ** (-params.alpha - 1)
    return damping, mass


def ode_residual(ft: FunctionalTrace):
    """Residual of ``F0'' + d(t) F0' - c(t) F0 - int |u|^p`` at interior samples.

    ``F0''`` is the second difference of ``F0`` itself, so the residual also
    measures the consistency of ``F0prime`` (from ``int u_t``) with ``F0``.
    Returns ``(times, residual)``.
    """
    t = ft.times
    if t.size < 3:
        return t[:0], t[:0]
    h0 = t[1:-1] - t[:-2]
    h1 = t[2:] - t[1:-1]
    F = ft.F0
    second = 2 * (h0 * F[2:] - (h0 + h1) * F[1:-1] + h1 * F[:-2]) / (h0 * h1 * (h0 + h1))
    damping, mass = _coefficients(ft.params, t[1:-1], ft.mode)
    forcing = ft.Lp[1:-1] if ft.mode == "full" else 0.0
    res = second + damping * ft.F0prime[1:-1] - mass * F[1:-1] - forcing
    return t[1:-1], res


def multiplied_residual(ft: FunctionalTrace):
    """Residual of ``(m F0')' - m (c F0 + int |u|^p)`` using ``F0prime`` from ``int u_t``."""
    p = ft.params
    t = ft.times
    if t.size < 3:
        return t[:0], t[:0]
    m = m_of_t(t, p.mu1, p.beta) if ft.mode != "free" else np.ones_like(t)
    mf = m * ft.F0prime
    deriv = np.gradient(mf, t, edge_order=2)
    _, mass = _coefficients(p, t, ft.mode)
    forcing = ft.Lp if ft.mode == "full" else 0.0
    res = deriv - m * (mass * ft.F0 + forcing)
    return t[1:-1], res[1:-1]


@dataclass(frozen=True)
class Constants:
    """Explicit constants of the lower-bound chain for one data profile."""

    m0: float
    C1: float
    C2: float
    C3: float
    C4: float
    C8: float
    C9: float
    C10: float
    C_fg: float
    g_integral: float
    g_l1: float

    def as_dict(self):
        return dict(self.__dict__)


def _radial_integral(fun, support, n):
    val, _ = integrate.quad(
        lambda r: SURFACE_AREA[n] * r ** (n - 1) * float(fun(np.array([r]))[0]),
        0.0,
        support,
        limit=200,
        epsabs=0.0,
        epsrel=1e-12,
    )
    return val


def compute_constants(params: ProblemParams, data, c1: float | None = None) -> Constants:
    """Assemble ``C1 .. C10`` and ``C_{f,g}`` for ``params`` and radial ``data``.

    ``C1`` defaults to the empirical supremum of the normalized test-function ratio.
    """
    n, p, R = params.n, params.p, params.R
    m0 = float(m_of_t(0.0, params.mu1, params.beta))
    if c1 is None:
        c1 = empirical_c1(n, p, float(R))
    phi = lambda r: np.exp(log_phi1(r, n))
    C_fg = _radial_integral(lambda r: (data.f(r) + data.g(r)) * phi(r), data.support, n)
    g_int = _radial_integral(data.g, data.support, n)
    g_l1 = _radial_integral(lambda r: np.abs(data.g(r)), data.support, n)
    C2 = (UNIT_BALL_VOLUME[n] * R**n) ** (-(p - 1))
    C3 = C2 * m0
    C4 = m0 * c1 ** (1 - p) * (F1_FACTOR * m0 * C_fg) ** p
    C8 = m0 * g_int
    C9 = C2 * C8**p
    C10 = m0 * C9 / ((p + 1) * (p + 2))
    return Constants(m0, c1, C2, C3, C4, C8, C9, C10, C_fg, g_int, g_l1)


def _cumtrapz(y, t):
    return integrate.cumulative_trapezoid(y, t, initial=0.0)


def _window(ft: FunctionalTrace, t_min=0.0, strict=False):
    t = ft.times
    lo = t > t_min if strict else t >= t_min - 1e-12
    return lo & (t <= ft.t_stop + 1e-12)


def _series(ft: FunctionalTrace, key: str, source: str):
    return getattr(ft, key) if source == "full" or key not in ft.half else ft.half[key]


def _check_series(name, ft: FunctionalTrace, c: Constants, source="full"):
    """``(times, lhs, rhs, mask)`` for the named bound using full or half quadrature."""
    p = ft.params
    n, pw, eps = p.n, p.p, p.eps
    t = ft.times
    F0 = _series(ft, "F0", source)
    F0p = _series(ft, "F0prime", source)
    Lp = _series(ft, "Lp", source)
    F1 = _series(ft, "F1", source)
    decay = (1 + t) ** (-n * (pw - 1))
    if name == "F0_positive":
        return t, F0, np.zeros_like(t), _window(ft, strict=True)
    if name == "F0prime_integral":
        return t, F0p, c.m0 * _cumtrapz(Lp, t), _window(ft)
    if name == "holder_Lp":
        return t, Lp, c.C2 * decay * np.abs(F0) ** pw, _window(ft)
    if name == "F0_double_integral":
        inner = _cumtrapz(decay * np.maximum(F0, 0) ** pw, t)
        return t, F0, c.C3 * _cumtrapz(inner, t), _window(ft)
    if name == "F0prime_power":
        k = (n - 1) * (1 - pw / 2)
        tt = np.maximum(t, 1.0)
        if abs(k + 1) < 1e-14:
            integral = np.log((1 + tt) / 2)
        else:
            integral = ((1 + tt) ** (k + 1) - 2 ** (k + 1)) / (k + 1)
        return t, F0p, c.C4 * eps**pw * integral, _window(ft, 1.0)
    if name == "F0_power":
        tt = np.maximum(t, 1.0)
        rhs = c.C4 / (n * (n + 1)) * eps**pw * (1 + tt) ** (-(n - 1) * pw / 2) * (tt - 1) ** (n + 1)
        return t, F0, rhs, _window(ft, 1.0)
    if name == "F1_lower":
        start = 0.0 if ft.f_nonzero else 1.0
        return t, F1, np.full_like(t, F1_FACTOR * c.m0 * c.C_fg * eps), _window(ft, start)
    if name == "F0_linear":
        return t, F0, c.C8 * eps * t, _window(ft)
    if name == "Lp_power":
        return t, Lp, c.C9 * eps**pw * decay * t**pw, _window(ft)
    if name == "F0_improved":
        return t, F0, c.C10 * eps**pw * decay * t ** (pw + 2), _window(ft)
    raise KeyError(name)


def _normalized_gap(t, lhs, rhs, mask):
    if not np.any(mask):
        return t[:0], np.zeros(0), 0.0
    scale = float(max(np.max(np.abs(lhs[mask])), np.max(np.abs(rhs[mask]))))
    gap = lhs[mask] - rhs[mask]
    if scale == 0:
        return t[mask], np.zeros_like(gap), 0.0
    return t[mask], gap / scale, scale


def _verdict(name, ft, c, coarse=None, note=""):
    t, lhs, rhs, mask = _check_series(name, ft, c)
    tm, gap, _ = _normalized_gap(t, lhs, rhs, mask)
    if tm.size == 0:
        return InequalityVerdict(name, 0, 0.0, 0.0, True, vacuous=True, note="empty time window")
    _, lhs_h, rhs_h, _ = _check_series(name, ft, c, source="half")
    _, gap_h, _ = _normalized_gap(t, lhs_h, rhs_h, mask)
    quad_err = float(np.max(np.abs(gap - gap_h))) / 3 if gap_h.size == gap.size else 0.0
    disc_err = 0.0
    if coarse is not None:
        tc, lc, rc, mc = _check_series(name, coarse, c)
        tcm, gap_c, _ = _normalized_gap(tc, lc, rc, mc)
        if tcm.size >= 2:
            inside = (tm >= tcm[0]) & (tm <= tcm[-1])
            if np.any(inside):
                disc_err = float(np.max(np.abs(gap[inside] - np.interp(tm[inside], tcm, gap_c))))
    tol = 10 * (quad_err + disc_err)
    margin = float(np.min(gap))
    return InequalityVerdict(name, int(tm.size), margin, tol, margin >= -tol, note=note)


def _require_nonneg(data):
    if data is None:
        raise PreconditionError("bounds need the initial data profiles")
    if not (data.f_nonnegative and data.g_nonnegative):
        raise PreconditionError("bounds need nonnegative data")


def verify_F0_lower_bounds(ftrace, params, constants, data, coarse=None):
    """Verdicts for the ``F0'`` bound and the ``F0`` and ``int |u|^p`` lower bounds.

    The ``eps*t`` family needs ``g`` not identically zero and raises
    :class:`PreconditionError` otherwise.
    """
    _require_nonneg(data)
    names = ["F0prime_integral", "F0_double_integral", "F0prime_power", "F0_power"]
    out = [_verdict(nm, ftrace, constants, coarse) for nm in names]
    if data.g_is_zero:
        raise PreconditionError("the eps*t bounds need g not identically zero")
    out += [_verdict(nm, ftrace, constants, coarse) for nm in ("F0_linear", "Lp_power", "F0_improved")]
    return out


def verify_F1_lower_bound(ftrace, params, constants, data, coarse=None):
    """``F1(t) > (1 - e^-2)/2 m(0) C_fg eps``, from ``t = 1`` (or ``t = 0`` when ``f`` is nonzero)."""
    _require_nonneg(data)
    return _verdict("F1_lower", ftrace, constants, coarse)


def verify_positivity(ftrace, constants, coarse=None):
    v = _verdict("F0_positive", ftrace, constants, coarse)
    strict = bool(np.all(ftrace.F0[_window(ftrace, strict=True)] > 0))
    v.passed = v.passed and strict
    return v


def verify_holder(ftrace, constants, coarse=None):
    return _verdict("holder_Lp", ftrace, constants, coarse)


def _identity_verdict(name, t, res, scale, coarse_res=None):
    if t.size == 0:
        return InequalityVerdict(name, 0, 0.0, 0.0, True, vacuous=True)
    err = float(np.max(np.abs(res))) / scale if scale > 0 else 0.0
    tol = 1e-12
    if coarse_res is not None and coarse_res.size:
        tol = max(tol, 10 * float(np.max(np.abs(coarse_res))) / scale if scale > 0 else 0.0)
    return InequalityVerdict(name, int(t.size), -err, tol, err <= tol)


def verify_identities(ftrace, coarse=None):
    """The F0 ODE, its multiplied form and ``W = lambda F0`` as verdicts.

    An identity's margin is minus its normalized residual; the tolerance is
    ten times the coarse-grid residual (first-order-safe for a second-order
    scheme).
    """
    out = []
    sel = lambda ft, t: (t <= ft.t_stop + 1e-12)
    scale = float(np.max(np.abs(ftrace.Lp)) + np.max(np.abs(ftrace.F0prime))) or 1.0
    for name, fn in (("ode_F0", ode_residual), ("ode_multiplied", multiplied_residual)):
        t, res = fn(ftrace)
        keep = sel(ftrace, t)
        cres = None
        if coarse is not None:
            tc, rc = fn(coarse)
            cres = rc[sel(coarse, tc)]
        out.append(_identity_verdict(name, t[keep], res[keep], scale, cres))
    p = ftrace.params
    lam = lambda_of_t(ftrace.times, p.mu1, p.beta) if p.beta > 1 else 1.0
    diff = ftrace.W - lam * ftrace.F0
    wscale = float(np.max(np.abs(ftrace.W))) or 1.0
    err = float(np.max(np.abs(diff))) / wscale
    out.append(InequalityVerdict("W_equals_lambda_F0", ftrace.times.size, -err, 1e-10, err <= 1e-10))
    return out


def w_bound(trace: SolutionTrace, g_l1: float):
    """``(times, r, w, bound, mask)`` for the pointwise lower bound on ``w = lambda u``."""
    p = trace.params
    t = trace.times[:, None]
    r = trace.r[None, :]
    R = p.R
    lam = lambda_of_t(trace.times, p.mu1, p.beta)[:, None]
    lam0 = float(lambda_of_t(0.0, p.mu1, p.beta))
    w = lam * trace.u
    rep = trace.report
    t_stop = STOP_FRACTION * rep.T_num if rep.blew_up else rep.T_num
    mask = (t >= 2 * R) & (r >= R) & (r <= t - R) & (t <= t_stop + 1e-12)
    with np.errstate(invalid="ignore", divide="ignore"):
        bound = lam0 * g_l1 * p.eps / (
            2 * math.sqrt(2) * math.pi * np.sqrt(t + R) * np.sqrt(np.maximum(t - r + R, 1e-300))
        )
    return trace.times, trace.r, w, bound, mask


def _check_thm4_case(trace: SolutionTrace, data):
    p = trace.params
    if p.n != 2 or p.p != 2:
        raise PreconditionError("pointwise bound is stated for n = p = 2")
    if data is None or not data.f_is_zero or data.g_is_zero or not data.g_nonnegative:
        raise PreconditionError("pointwise bound needs f = 0 and g >= 0 not identically zero")
    if not thm4_condition(p):
        raise PreconditionError("Q-positivity condition fails for these parameters")


def _cone_gap(trace, g_l1, lower):
    times, r, w, bound, mask = w_bound(trace, g_l1)
    rhs = bound if not lower else np.zeros_like(bound)
    if not np.any(mask):
        return None
    scale = float(np.max(np.abs(np.where(mask, np.maximum(w, rhs), 0.0))))
    gap = np.where(mask, (w - rhs) / scale, np.inf)
    return times, r, gap, mask


def _pointwise_verdict(name, trace, data, coarse, lower):
    _check_thm4_case(trace, data)
    g_l1 = 2 * math.pi * integrate.quad(lambda s: s * abs(float(data.g(np.array([s]))[0])), 0, data.support)[0]
    fine = _cone_gap(trace, g_l1, lower)
    if fine is None:
        return InequalityVerdict(name, 0, 0.0, 0.0, True, vacuous=True, note="no sample with t >= 2R")
    times, r, gap, mask = fine
    margin = float(np.min(gap[mask]))
    tol = 0.0
    if coarse is not None:
        cg = _cone_gap(coarse, g_l1, lower)
        if cg is not None:
            tc, rc, gapc, maskc = cg
            for i, tv in enumerate(times):
                j = np.argmin(np.abs(tc - tv))
                if abs(tc[j] - tv) > 1e-9 or not np.any(mask[i]) or not np.any(maskc[j]):
                    continue
                rows = mask[i]
                interp = np.interp(r[rows], rc[maskc[j]], gapc[j][maskc[j]])
                tol = max(tol, float(np.max(np.abs(gap[i][rows] - interp))))
    tol *= 10
    n_times = int(np.count_nonzero(np.any(mask, axis=1)))
    return InequalityVerdict(name, n_times, margin, tol, margin >= -tol)


def verify_pointwise_w_bound(trace: SolutionTrace, params=None, data=None, coarse=None):
    """Lower bound on ``w = lambda u`` over the cone ``R <= r <= t - R``, ``t >= 2R``."""
    return _pointwise_verdict("w_pointwise", trace, data or trace.data, coarse, lower=False)


def verify_w_positive(trace: SolutionTrace, data=None, coarse=None):
    return _pointwise_verdict("w_positive", trace, data or trace.data, coarse, lower=True)


def verify_all(trace: SolutionTrace, coarse: SolutionTrace | None = None, constants=None):
    """Every applicable verdict for one run; ``coarse`` is an optional half-resolution rerun."""
    data = trace.data
    params = trace.params
    ft = track(trace)
    cft = track(coarse) if coarse is not None else None
    c = constants or compute_constants(params, data)
    out = [verify_positivity(ft, c, cft), verify_holder(ft, c, cft)]
    if not data.g_is_zero:
        out += verify_F0_lower_bounds(ft, params, c, data, cft)
    else:
        out += [_verdict(nm, ft, c, cft) for nm in ("F0prime_integral", "F0_double_integral", "F0prime_power", "F0_power")]
    out.append(verify_F1_lower_bound(ft, params, c, data, cft))
    out += verify_identities(ft, cft)
    if params.n == 2 and params.p == 2 and data.f_is_zero and not data.g_is_zero and params.alpha <= params.beta:
        if thm4_condition(params):
            out.append(verify_w_positive(trace, data, coarse))
            out.append(verify_pointwise_w_bound(trace, params, data, coarse))
    return out, ft, c
