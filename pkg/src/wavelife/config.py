"""INI run configuration.

Every section and key is listed in ``SCHEMA``; anything else is rejected so
that a typo cannot silently fall back to a default.  Example::

    [problem]
    n = 1
    p = 2
    eps = 0.5

    [grid]
    dr = 0.02
    horizon = 110
    r_max = 120

    [sweep]
    eps_start = 0.4
    eps_stop = 0.01
    eps_num = 8
    theorem = thm3
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .exponents import THEOREMS, ProblemParams
from .solver import MODES, InitialData, RadialGrid, bump


class ConfigError(ValueError):
    pass


SCHEMA = {
    "problem": {"n": int, "p": float, "mu1": float, "mu2": float, "alpha": float, "beta": float, "R": float, "eps": float},
    "data": {"f_amplitude": float, "g_amplitude": float, "power": int},
    "grid": {"dr": float, "r_max": float, "cfl": float, "horizon": float, "sample_dt": float},
    "run": {"mode": str, "threshold": float, "coarse_factor": int},
    "sweep": {
        "eps": str,
        "eps_start": float,
        "eps_stop": float,
        "eps_num": int,
        "theorem": str,
        "workers": int,
    },
    "output": {"dir": str},
}

SWEEP_THEOREMS = THEOREMS + ("thm4",)


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a run or a sweep; plain values only, so it pickles."""

    params: ProblemParams
    f_amplitude: float = 0.0
    g_amplitude: float = 1.0
    power: int = 6
    dr: float = 0.02
    r_max: float | None = None
    cfl: float = 0.5
    horizon: float = 20.0
    sample_dt: float = 0.1
    mode: str = "full"
    threshold: float = 1e8
    coarse_factor: int = 2
    eps_list: tuple = field(default_factory=tuple)
    theorem: str = "thm1"
    workers: int = 1
    out_dir: str = "."

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.theorem not in SWEEP_THEOREMS:
            raise ConfigError(f"theorem must be one of {SWEEP_THEOREMS}, got {self.theorem!r}")
        if not (self.dr > 0 and self.horizon > 0 and self.sample_dt > 0):
            raise ConfigError("dr, horizon and sample_dt must be positive")
        if not 0 < self.cfl < 1:
            raise ConfigError(f"cfl must lie in (0, 1), got {self.cfl}")
        if self.f_amplitude < 0 or self.g_amplitude < 0:
            raise ConfigError("profile amplitudes must be nonnegative")
        if self.f_amplitude == 0 and self.g_amplitude == 0:
            raise ConfigError("data is identically zero")
        if self.threshold <= 0 or self.workers < 1 or self.coarse_factor < 2:
            raise ConfigError("threshold > 0, workers >= 1 and coarse_factor >= 2 required")
        if any(not e > 0 for e in self.eps_list):
            raise ConfigError("sweep eps values must be positive")

    @property
    def domain(self) -> float:
        # wide margin: the explicit scheme leaks a geometrically decaying precursor ahead of the cone
        return self.r_max if self.r_max is not None else self.horizon + self.params.R + 64 * self.dr

    def grid(self, dr=None) -> RadialGrid:
        return RadialGrid.with_spacing(self.domain, dr or self.dr, self.cfl)

    def data(self) -> InitialData:
        R = self.params.R
        f = bump(R, self.f_amplitude, self.power) if self.f_amplitude else None
        g = bump(R, self.g_amplitude, self.power) if self.g_amplitude else None
        kw = {k: v for k, v in (("f", f), ("g", g)) if v is not None}
        return InitialData(support=R, **kw)

    def with_eps(self, eps) -> "RunConfig":
        return replace(self, params=self.params.replace(eps=eps))

    def override(self, **changes) -> "RunConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def _geometric(start, stop, num):
    if num < 3:
        raise ConfigError("a geometric eps range needs at least 3 points")
    if start <= 0 or stop <= 0 or math.isclose(start, stop):
        raise ConfigError("a geometric eps range needs positive endpoints with ratio != 1")
    return tuple(float(e) for e in np.geomspace(start, stop, num))


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    values: dict[str, dict] = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        values[section] = {}
        for key, raw in cp.items(section):
            kind = SCHEMA[section].get(key)
            if kind is None:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            try:
                values[section][key] = kind(raw)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc

    problem = values.get("problem", {})
    if "n" not in problem or "p" not in problem:
        raise ConfigError("[problem] needs n and p")
    try:
        params = ProblemParams(**problem)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    sweep = dict(values.get("sweep", {}))
    eps_list: tuple = ()
    if "eps" in sweep:
        if {"eps_start", "eps_stop", "eps_num"} & sweep.keys():
            raise ConfigError("give either an eps list or a geometric range, not both")
        try:
            eps_list = tuple(float(x) for x in sweep.pop("eps").split(",") if x.strip())
        except ValueError as exc:
            raise ConfigError(f"bad eps list: {exc}") from exc
    elif {"eps_start", "eps_stop", "eps_num"} & sweep.keys():
        try:
            eps_list = _geometric(sweep.pop("eps_start"), sweep.pop("eps_stop"), sweep.pop("eps_num"))
        except KeyError as exc:
            raise ConfigError(f"geometric range is missing {exc}") from exc

    kw = {}
    kw.update(values.get("data", {}))
    kw.update(values.get("grid", {}))
    kw.update(values.get("run", {}))
    kw.update(sweep)
    if "dir" in values.get("output", {}):
        kw["out_dir"] = values["output"]["dir"]
    return RunConfig(params=params, eps_list=eps_list, **kw)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text)
