"""
Runtime checks of the a-priori bounds, norm time series, the weak-form
residual, and an RK4 oracle for spatially homogeneous data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .grid import Grid, face_average, face_gradient, gradient_magnitude, laplacian
from .physics import DiffusivitySpec, Sensitivities, eval_H
from .threshold import kappa as kappa_of

DEFAULT_K = (2, 4, 8)
DEFAULT_BETA = (1, 2)
MASS_TOL = 1e-10
L1_TOL = 1e-6
HARD_FLAGS = ("neg_u", "neg_v", "neg_w", "w_above_sup", "nonfinite")


def lp_norm(grid: Grid, f: np.ndarray, p) -> float:
    """(sum |f|^p vol)^(1/p); ``p = inf`` gives max |f|."""
    if isinstance(p, str) and p.lower() in ("inf", "infinity"):
        p = math.inf
    p = float(p)
    if not p >= 1:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    a = np.abs(np.asarray(f, dtype=float))
    if math.isinf(p):
        return float(np.max(a))
    if p == 1:
        return float(np.sum(a) * grid.cell_volume)
    # scale by the max to keep large exponents from overflowing
    top = float(np.max(a))
    if top == 0:
        return 0.0
    return top * float(np.sum((a / top) ** p) * grid.cell_volume) ** (1.0 / p)


@dataclass
class DiagnosticsContext:
    grid: Grid
    w0: np.ndarray
    w0_sup: float
    mass0: float
    mu: float
    kappa: Optional[float]
    k_exponents: tuple = DEFAULT_K
    betas: tuple = DEFAULT_BETA

    @classmethod
    def from_initial(cls, grid: Grid, initial, sens: Sensitivities,
                     k_exponents: Sequence[float] = DEFAULT_K,
                     betas: Sequence[float] = DEFAULT_BETA) -> "DiagnosticsContext":
        w0 = np.array(initial.w, dtype=float)
        if np.all(w0 > 0):
            kap = kappa_of(grid, w0)
        else:
            # w0 = 0 has a trivially vanishing kappa; mixed signs leave it undefined
            kap = 0.0 if not np.any(w0) else None
        return cls(grid, w0, float(np.max(w0)), grid.integrate(initial.u), sens.mu, kap,
                   tuple(k_exponents), tuple(betas))

    @property
    def l1_bound(self) -> float:
        return max(self.mass0, self.grid.measure)


@dataclass
class DiagnosticsRecord:
    t: float
    step: int
    l1_u: float
    l2_u: float
    linf_u: float
    lk_u: dict
    linf_grad_v: float
    l2beta_grad_v: dict
    linf_v: float
    linf_w: float
    linf_grad_w: float
    mass_residual: float
    kappa_violation: float
    w_exactness_err: float
    l1_bound: float
    flags: list = field(default_factory=list)

    @property
    def hard_violation(self) -> bool:
        return any(f in HARD_FLAGS for f in self.flags)


def check_invariants(state, ctx: DiagnosticsContext, mass_residual: float = 0.0,
                     step: int = 0) -> DiagnosticsRecord:
    """Fill a DiagnosticsRecord for ``state``; never raises on a violated bound."""
    g = ctx.grid
    u, v, w = state.u, state.v, state.w
    flags = []
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v)) and np.all(np.isfinite(w))):
        flags.append("nonfinite")
    if np.any(u < 0):
        flags.append("neg_u")
    if np.any(v < 0):
        flags.append("neg_v")
    if np.any(w < 0):
        flags.append("neg_w")
    if np.any(w > ctx.w0_sup + 1e-12):
        flags.append("w_above_sup")

    grad_v = gradient_magnitude(g, v)
    grad_w = gradient_magnitude(g, w)
    l1 = lp_norm(g, u, 1)
    if ctx.mu > 0 and l1 > ctx.l1_bound * (1 + L1_TOL):
        flags.append("l1_exceeded")
    if mass_residual > MASS_TOL:
        flags.append("mass_identity")

    if ctx.kappa is not None:
        defect = -laplacian(g, w) - ctx.w0_sup * v - ctx.kappa
        kap_viol = max(0.0, float(np.max(defect)))
        if kap_viol > 0:
            flags.append("kappa_soft")
    else:
        kap_viol = float("nan")

    w_exact = ctx.w0 * np.exp(-state.int_v)
    return DiagnosticsRecord(
        t=float(state.t),
        step=int(step),
        l1_u=l1,
        l2_u=lp_norm(g, u, 2),
        linf_u=lp_norm(g, u, math.inf),
        lk_u={k: lp_norm(g, u, k) for k in ctx.k_exponents},
        linf_grad_v=float(np.max(grad_v)),
        l2beta_grad_v={b: lp_norm(g, grad_v, 2 * b) for b in ctx.betas},
        linf_v=float(np.max(np.abs(v))),
        linf_w=float(np.max(np.abs(w))),
        linf_grad_w=float(np.max(grad_w)),
        mass_residual=float(mass_residual),
        kappa_violation=kap_viol,
        w_exactness_err=float(np.max(np.abs(w - w_exact))),
        l1_bound=ctx.l1_bound,
        flags=flags,
    )


def _rhs(y: np.ndarray, mu: float) -> np.ndarray:
    u, v, w = y
    return np.array([mu * u * (1.0 - u - w), u - v, -v * w])


def ode_oracle(mu, y0, T: float, dt: float):
    """Classical RK4 for u' = mu u (1-u-w), v' = u - v, w' = -v w.

    Returns ``(t, y)`` with ``y[:, 0..2] = u, v, w``.  The last step is
    shortened so the grid ends exactly at ``T``.
    """
    if isinstance(mu, Sensitivities):
        mu = mu.mu
    y = np.array(y0, dtype=float)
    if y.shape != (3,) or np.any(y < 0):
        raise ValueError("y0 must be three nonnegative numbers")
    if T < 0 or dt <= 0:
        raise ValueError("need T >= 0 and dt > 0")
    n = int(math.ceil(T / dt - 1e-12)) if T > 0 else 0
    ts = [0.0]
    ys = [y.copy()]
    t = 0.0
    for i in range(n):
        h = min(dt, T - t) if i == n - 1 else dt
        k1 = _rhs(y, mu)
        k2 = _rhs(y + 0.5 * h * k1, mu)
        k3 = _rhs(y + 0.5 * h * k2, mu)
        k4 = _rhs(y + h * k3, mu)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = T if i == n - 1 else t + h
        ts.append(t)
        ys.append(y.copy())
    return np.array(ts), np.array(ys)


def ode_oracle_at(mu, y0, times: Sequence[float], dt: float) -> np.ndarray:
    """Oracle values at the given output times (each integrated from 0)."""
    times = np.asarray(times, dtype=float)
    out = np.empty((len(times), 3))
    y = np.array(y0, dtype=float)
    t_prev = 0.0
    for i, t in enumerate(times):
        if t > t_prev:
            _, ys = ode_oracle(mu, y, t - t_prev, dt)
            y = ys[-1]
        out[i] = y
        t_prev = t
    return out


@dataclass(frozen=True)
class TestFunction:
    """phi(x, t) = psi(t) * prod_a cos(j_a pi x_a / L_a).

    ``time_profile="bump"`` uses psi(t) = exp(1 - 1/(1 - (t/T)^2)), which is
    1 at t = 0 and flat to all orders at t = T; ``"constant"`` uses psi = 1.
    """

    __test__ = False

    modes: tuple = (1,)
    T: float = 1.0
    time_profile: str = "bump"

    @property
    def ident(self) -> str:
        return f"cos{'x'.join(str(j) for j in self.modes)}_{self.time_profile}"

    def psi(self, t):
        t = np.asarray(t, dtype=float)
        if self.time_profile == "constant":
            return np.ones_like(t)
        s = t / self.T
        out = np.zeros_like(s)
        inside = s < 1
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
        return out

    def dpsi(self, t):
        t = np.asarray(t, dtype=float)
        if self.time_profile == "constant":
            return np.zeros_like(t)
        s = t / self.T
        out = np.zeros_like(s)
        inside = s < 1
        si = s[inside]
        out[inside] = (np.exp(1.0 - 1.0 / (1.0 - si ** 2))
                       * (-2.0 * si / self.T) / (1.0 - si ** 2) ** 2)
        return out

    def _modes(self, grid: Grid) -> tuple:
        modes = tuple(self.modes)
        if len(modes) == 1 and grid.dim == 2:
            modes = (modes[0], 0)
        if len(modes) != grid.dim:
            raise ValueError("test function modes must match the grid dimension")
        return modes

    def spatial(self, grid: Grid):
        """Cell values, analytic Laplacian at cells, and normal derivatives on faces."""
        modes = self._modes(grid)
        ks = [j * math.pi / L for j, L in zip(modes, grid.lengths)]
        X = grid.centers()
        c = np.ones(grid.shape)
        for k, x in zip(ks, X):
            c = c * np.cos(k * x)
        lap = -sum(k * k for k in ks) * c
        dfaces = []
        for axis in range(grid.dim):
            Xf = grid.face_centers(axis)
            d = np.ones(grid.face_shape(axis))
            for a, (k, x) in enumerate(zip(ks, Xf)):
                d = d * (-k * np.sin(k * x) if a == axis else np.cos(k * x))
            dfaces.append(d)
        return c, lap, dfaces


@dataclass
class WeakResidualReport:
    test_function: str
    residual_u: float
    residual_v: float
    residual_w: float
    level: int = 0
    lhs: tuple = ()
    rhs: tuple = ()

    @property
    def max_residual(self) -> float:
        return max(self.residual_u, self.residual_v, self.residual_w)


def _trapezoid(y: np.ndarray, t: np.ndarray) -> float:
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(t)))


def weak_residual(grid: Grid, snapshots, spec: DiffusivitySpec, sens: Sensitivities,
                  test: TestFunction, level: int = 0) -> WeakResidualReport:
    """Defects of the three integral identities along a snapshot sequence.

    ``snapshots`` is a sequence of objects with ``t, u, v, w`` attributes
    (e.g. States) or ``(step, State)`` pairs, starting at the initial time.
    Each residual is ``|LHS - RHS| / max(|LHS|, |RHS|, 1)``.
    """
    snaps = [s[1] if isinstance(s, tuple) else s for s in snapshots]
    if len(snaps) < 3:
        raise ValueError("weak_residual needs at least 3 snapshots")
    ts = np.array([s.t for s in snaps])
    if np.any(np.diff(ts) <= 0):
        raise ValueError("snapshot times must be strictly increasing")
    vol = grid.cell_volume
    c, lap_c, dc = test.spatial(grid)
    psi = test.psi(ts)
    dpsi = test.dpsi(ts)
    n = len(snaps)

    int_u_c = np.empty(n)
    int_v_c = np.empty(n)
    int_w_c = np.empty(n)
    rhs_u = np.empty(n)
    rhs_v = np.empty(n)
    rhs_w = np.empty(n)
    for i, s in enumerate(snaps):
        u, v, w = s.u, s.v, s.w
        int_u_c[i] = np.sum(u * c) * vol
        int_v_c[i] = np.sum(v * c) * vol
        int_w_c[i] = np.sum(w * c) * vol
        taxis = 0.0
        diff_v = 0.0
        for axis in range(grid.dim):
            uf = face_average(grid, u, axis)
            gv = face_gradient(grid, v, axis)
            gw = face_gradient(grid, w, axis)
            taxis += np.sum(uf * (sens.chi * gv + sens.xi * gw) * dc[axis]) * vol
            diff_v += np.sum(gv * dc[axis]) * vol
        rhs_u[i] = (np.sum(eval_H(spec, u) * lap_c) * vol + taxis
                    + np.sum(sens.mu * u * (1.0 - u - w) * c) * vol)
        rhs_v[i] = -diff_v - int_v_c[i] + int_u_c[i]
        rhs_w[i] = -np.sum(v * w * c) * vol

    def identity(int_f_c, rhs):
        lhs = (-_trapezoid(dpsi * int_f_c, ts) - psi[0] * int_f_c[0]
               + psi[-1] * int_f_c[-1])
        r = _trapezoid(psi * rhs, ts)
        return lhs, r, abs(lhs - r) / max(abs(lhs), abs(r), 1.0)

    lu, ru, res_u = identity(int_u_c, rhs_u)
    lv, rv, res_v = identity(int_v_c, rhs_v)
    lw, rw, res_w = identity(int_w_c, rhs_w)
    return WeakResidualReport(test.ident, res_u, res_v, res_w, level, (lu, lv, lw), (ru, rv, rw))
