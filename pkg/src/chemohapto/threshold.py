"""
Closed-form boundedness threshold for the diffusion exponent.

Given the sensitivities, the logistic rate, the sup of the initial tissue
density and the maximal-regularity constant ``lambda0``, the critical
exponent is

    m_crit = 2N / (N + gamma_star),
    gamma_star = (mu_star + 1)(N + mu_star - 1) / N,
    mu_star = A / (A - mu)_+,    A = sup_{s>=1} lambda0^{1/(s+1)} (chi + xi*|w0|_inf).

``lambda0`` is an abstract constant and has to be supplied by the caller.
Infinite values are carried as ``math.inf``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .grid import Grid, face_gradient, laplacian


@dataclass(frozen=True)
class ThresholdInputs:
    N: int
    chi: float
    xi: float
    mu: float
    w0_sup: float
    lambda0: float = 1.0

    def __post_init__(self):
        vals = (self.chi, self.xi, self.mu, self.w0_sup, self.lambda0)
        if not all(math.isfinite(float(v)) for v in vals):
            raise ValueError("threshold inputs must be finite")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if self.chi <= 0 or self.xi <= 0:
            raise ValueError("chi and xi must be strictly positive")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")
        if self.w0_sup < 0:
            raise ValueError("w0_sup must be nonnegative")
        if self.lambda0 <= 0:
            raise ValueError("lambda0 must be positive")


@dataclass
class ThresholdReport:
    M: float
    mu_star: float
    gamma_star: float
    m_crit: float
    m_bar: float
    kappa: Optional[float] = None
    m: Optional[float] = None
    admissible: Optional[bool] = None
    # same chain with max{1, lambda0} in place of the supremum term
    m_crit_alt: Optional[float] = None
    admissible_alt: Optional[bool] = None
    note: str = ""

    def as_dict(self) -> dict:
        return {k: _encode(v) for k, v in asdict(self).items()}

    def to_text(self) -> str:
        return "\n".join(f"{k}={_fmt(v)}" for k, v in self.as_dict().items()) + "\n"

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=False)


def _encode(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def sup_lambda_term(lambda0: float) -> float:
    """sup over s >= 1 of lambda0**(1/(s+1)).

    The map is decreasing in s when lambda0 > 1 (max at s = 1) and
    increasing toward 1 when lambda0 < 1.
    """
    if not lambda0 > 0:
        raise ValueError(f"lambda0 must be positive, got {lambda0}")
    return math.sqrt(lambda0) if lambda0 >= 1.0 else 1.0


def sensitivity_scale(inputs: ThresholdInputs) -> float:
    """A = sup_lambda_term(lambda0) * (chi + xi * w0_sup)."""
    return sup_lambda_term(inputs.lambda0) * (inputs.chi + inputs.xi * inputs.w0_sup)


def _mu_star_from(A: float, mu: float) -> float:
    if mu >= A:
        return math.inf
    return A / (A - mu)


def mu_star(inputs: ThresholdInputs) -> float:
    return _mu_star_from(sensitivity_scale(inputs), inputs.mu)


def gamma_star(mu_star: float, N: int) -> float:
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if mu_star < 1:
        raise ValueError(f"mu_star must be >= 1, got {mu_star}")
    if math.isinf(mu_star):
        return math.inf
    return (mu_star + 1.0) * (N + mu_star - 1.0) / N


def _m_crit_from(gamma: float, N: int) -> float:
    if math.isinf(gamma):
        return 0.0
    return 2.0 * N / (N + gamma)


def m_bar(N: int) -> float:
    """Comparison exponent of the earlier global-existence result."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if N <= 8:
        return (2.0 * N * N + 4.0 * N - 4.0) / (N * (N + 4.0))
    return (2.0 * N * N + 3.0 * N + 2.0 - math.sqrt(8.0 * N * (N + 1.0))) / (N * (N + 20.0))


def m_critical(inputs: ThresholdInputs, m: Optional[float] = None,
               kappa: Optional[float] = None) -> ThresholdReport:
    """Evaluate the full threshold chain and, if ``m`` is given, its admissibility."""
    A = sensitivity_scale(inputs)
    ms = _mu_star_from(A, inputs.mu)
    gs = gamma_star(ms, inputs.N)
    mc = _m_crit_from(gs, inputs.N)

    A_alt = max(1.0, inputs.lambda0) * (inputs.chi + inputs.xi * inputs.w0_sup)
    mc_alt = _m_crit_from(gamma_star(_mu_star_from(A_alt, inputs.mu), inputs.N), inputs.N)

    report = ThresholdReport(M=A, mu_star=ms, gamma_star=gs, m_crit=mc,
                             m_bar=m_bar(inputs.N), kappa=kappa, m_crit_alt=mc_alt)
    if m is not None:
        report.m = float(m)
        report.admissible = bool(m > mc)
        report.admissible_alt = bool(m > mc_alt)
        if report.admissible != report.admissible_alt:
            report.note = ("admissibility differs between the sup_s lambda0^(1/(s+1)) form "
                           "and the max{1,lambda0} form")
    return report


def kappa(grid: Grid, w0: np.ndarray) -> float:
    """Discrete |lap w0|_inf + 4 |grad sqrt(w0)|_inf^2 + |w0|_inf / e."""
    w0 = grid.check_field(w0, "w0")
    if np.any(w0 <= 0):
        raise ValueError("w0 must be strictly positive for kappa")
    lap = np.max(np.abs(laplacian(grid, w0)))
    root = np.sqrt(w0)
    grad2 = max(float(np.max(face_gradient(grid, root, a) ** 2)) for a in range(grid.dim))
    return float(lap + 4.0 * grad2 + np.max(w0) / math.e)
