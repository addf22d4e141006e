"""Radial solver and verification harness for damped semilinear wave equations with a negative mass term."""

from .exponents import (
    ProblemParams,
    classify_damping,
    fujita_exponent,
    gamma,
    lifespan_exponent,
    solve_a_of_eps,
    strauss_exponent,
    thm4_condition,
)
from .functionals import compute_constants, track, verify_all
from .iteration import IterationFrame, predicted_lifespan, sequences, sp_limit
from .solver import InitialData, RadialGrid, bump, free_wave_oracle, solve
from .special import phi1, psi1, yz_lemma_check
from .sweep import fit_slope, run_sweep

__all__ = [
    "IterationFrame",
    "InitialData",
    "ProblemParams",
    "RadialGrid",
    "bump",
    "classify_damping",
    "compute_constants",
    "fit_slope",
    "free_wave_oracle",
    "fujita_exponent",
    "gamma",
    "lifespan_exponent",
    "phi1",
    "predicted_lifespan",
    "psi1",
    "run_sweep",
    "sequences",
    "solve",
    "solve_a_of_eps",
    "sp_limit",
    "strauss_exponent",
    "thm4_condition",
    "track",
    "verify_all",
    "yz_lemma_check",
]
