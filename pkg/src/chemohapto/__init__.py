"""Simulation and a-priori bound monitoring for a quasilinear chemotaxis-haptotaxis model."""

__version__ = "0.1.0"

from .grid import Grid, divergence, face_gradient, laplacian  # noqa: E402
from .physics import DiffusivitySpec, Sensitivities, assemble_flux, eval_D, eval_H  # noqa: E402
from .threshold import (  # noqa: E402
    ThresholdInputs,
    ThresholdReport,
    gamma_star,
    kappa,
    m_bar,
    m_critical,
    mu_star,
    sup_lambda_term,
)
from .solver import RunResult, SolverConfig, State, compute_dt, run, step  # noqa: E402
from .diagnostics import (  # noqa: E402
    DiagnosticsRecord,
    TestFunction,
    WeakResidualReport,
    check_invariants,
    lp_norm,
    ode_oracle,
    weak_residual,
)

__all__ = [
    "Grid", "divergence", "face_gradient", "laplacian",
    "DiffusivitySpec", "Sensitivities", "assemble_flux", "eval_D", "eval_H",
    "ThresholdInputs", "ThresholdReport", "gamma_star", "kappa", "m_bar", "m_critical",
    "mu_star", "sup_lambda_term",
    "RunResult", "SolverConfig", "State", "compute_dt", "run", "step",
    "DiagnosticsRecord", "TestFunction", "WeakResidualReport", "check_invariants", "lp_norm",
    "ode_oracle", "weak_residual",
]
