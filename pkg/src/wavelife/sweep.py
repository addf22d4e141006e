"""Epsilon sweeps: one solver run per amplitude, a log-log slope fit, and CSV/JSON output."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .config import RunConfig
from .exponents import lifespan_exponent, solve_a_of_eps
from .solver import BoundaryContamination, solve

CSV_COLUMNS = ("eps", "T_num", "reason", "dt_at_detection", "dr", "threshold")


class SweepError(RuntimeError):
    pass


class InsufficientSpan(ValueError):
    pass


class SweepEntry(NamedTuple):
    eps: float
    T_num: float
    reason: str
    dt_at_detection: float
    blew_up: bool


class SlopeFit(NamedTuple):
    slope: float
    intercept: float
    residual_norm: float


@dataclass
class SweepResult:
    entries: list
    theorem: str
    theoretical_exponent: float | None
    dr: float
    threshold: float
    fit: SlopeFit | None = None
    fit_note: str = ""
    a_eps_curve: list = field(default_factory=list)

    def __post_init__(self):
        self.entries = sorted(self.entries, key=lambda e: -e.eps)

    @property
    def fitted_slope(self) -> float | None:
        return self.fit.slope if self.fit else None

    @property
    def blown_up(self):
        return [e for e in self.entries if e.blew_up]


def fit_slope(entries, x="eps") -> SlopeFit:
    """OLS slope of ``log T`` against ``log eps`` (or ``log a(eps)`` with ``x='a'``).

    Accepts ``SweepEntry`` items or ``(eps, T)`` pairs; needs at least three
    points spanning a decade of ``eps``.
    """
    pts = [(e.eps, e.T_num) if isinstance(e, SweepEntry) else (float(e[0]), float(e[1])) for e in entries]
    if len(pts) < 3:
        raise InsufficientSpan(f"slope fit needs >= 3 blown-up entries, got {len(pts)}")
    eps = np.array([p[0] for p in pts])
    T = np.array([p[1] for p in pts])
    if np.any(eps <= 0) or np.any(T <= 0):
        raise InsufficientSpan("slope fit needs positive eps and T")
    span = math.log10(eps.max() / eps.min())
    if span < 1 - 1e-12:
        raise InsufficientSpan(f"eps spans {span:.3g} decades, need >= 1")
    X = np.log([solve_a_of_eps(e) for e in eps]) if x == "a" else np.log(eps)
    A = np.column_stack([X, np.ones_like(X)])
    coef, *_ = np.linalg.lstsq(A, np.log(T), rcond=None)
    resid = float(np.linalg.norm(A @ coef - np.log(T)))
    return SlopeFit(float(coef[0]), float(coef[1]), resid)


def theoretical_exponent(config: RunConfig) -> float | None:
    """Expected slope: ``-lifespan_exponent`` against ``log eps``; ``1`` against ``log a(eps)`` for thm4."""
    if config.theorem == "thm4":
        return 1.0
    try:
        return -lifespan_exponent(config.params.p, config.params.n, config.theorem)
    except ValueError:
        return None


def run_one(config: RunConfig, eps: float) -> SweepEntry:
    cfg = config.with_eps(eps)
    try:
        tr = solve(
            cfg.params,
            cfg.data(),
            cfg.grid(),
            cfg.horizon,
            mode=cfg.mode,
            threshold=cfg.threshold,
            sample_dt=None,
        )
    except BoundaryContamination as exc:
        raise SweepError(f"run at eps={eps!r} aborted: {exc}") from exc
    rep = tr.report
    return SweepEntry(float(eps), float(rep.T_num), rep.reason.value, float(rep.dt_last), rep.blew_up)


def run_sweep(config: RunConfig, workers: int | None = None) -> SweepResult:
    """Run every ``eps`` in ``config.eps_list``; results do not depend on ``workers``."""
    eps_list = sorted(config.eps_list, reverse=True)
    if not eps_list:
        raise ValueError("config has no sweep eps values")
    workers = workers or config.workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(run_one, [config] * len(eps_list), eps_list))
    else:
        entries = [run_one(config, e) for e in eps_list]
    result = SweepResult(
        entries, config.theorem, theoretical_exponent(config), config.dr, config.threshold
    )
    try:
        result.fit = fit_slope(result.blown_up, x="a" if config.theorem == "thm4" else "eps")
    except InsufficientSpan as exc:
        result.fit_note = str(exc)
    if config.theorem == "thm4":
        result.a_eps_curve = [(e.eps, solve_a_of_eps(e.eps)) for e in result.entries]
    return result


def sweep_csv(result: SweepResult) -> str:
    """CSV text; floats use ``repr`` so reruns are byte-identical."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for e in result.entries:
        w.writerow([repr(e.eps), repr(e.T_num), e.reason, repr(e.dt_at_detection), repr(result.dr), repr(result.threshold)])
    return buf.getvalue()


def a_eps_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("eps", "a_eps", "T_num"))
    for (eps, a), e in zip(result.a_eps_curve, result.entries):
        w.writerow([repr(eps), repr(a), repr(e.T_num)])
    return buf.getvalue()


def summary(result: SweepResult, config: RunConfig, provenance: dict | None = None) -> dict:
    return {
        "params": {k: v for k, v in config.params.__dict__.items() if k != "eps"},
        "theorem": result.theorem,
        "n_entries": len(result.entries),
        "n_blown_up": len(result.blown_up),
        "fitted_slope": result.fitted_slope,
        "intercept": result.fit.intercept if result.fit else None,
        "residual_norm": result.fit.residual_norm if result.fit else None,
        "fit_note": result.fit_note,
        "theoretical_exponent": result.theoretical_exponent,
        "slope_axis": "log a(eps)" if result.theorem == "thm4" else "log eps",
        "grid": {"dr": config.dr, "r_max": config.domain, "cfl": config.cfl, "horizon": config.horizon},
        "mode": config.mode,
        "threshold": config.threshold,
        "constants": provenance or {},
    }


def write_sweep(result: SweepResult, config: RunConfig, out_dir, provenance: dict | None = None):
    """Write ``sweep.csv``, ``summary.json`` and (thm4) ``a_eps.csv``; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "sweep.csv", out / "summary.json"]
    paths[0].write_text(sweep_csv(result))
    paths[1].write_text(json.dumps(summary(result, config, provenance), indent=2, sort_keys=True) + "\n")
    if result.a_eps_curve:
        paths.append(out / "a_eps.csv")
        paths[2].write_text(a_eps_csv(result))
    return paths
