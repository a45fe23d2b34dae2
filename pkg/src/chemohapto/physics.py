"""
Diffusivity laws and face-flux assembly for the cell-density equation.

The total face flux is

    F = -D_face * du/dn + u_up * (chi * dv/dn + xi * dw/dn)

with ``D_face`` the arithmetic mean of the cell diffusivities and ``u_up``
the donor cell picked by the sign of the advective velocity.  The cell
equation is then ``u_t = -div F + mu u (1 - u - w)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, face_gradient

U_FLOOR = 1e-12
LAWS = ("power", "power_regularized")


@dataclass(frozen=True)
class DiffusivitySpec:
    law: str = "power"
    m: float = 2.0
    c_d: float = 1.0
    epsilon: float = 0.0

    def __post_init__(self):
        if self.law not in LAWS:
            raise ValueError(f"unknown diffusivity law {self.law!r}, expected one of {LAWS}")
        if not self.m > 0:
            raise ValueError(f"m must be positive, got {self.m}")
        if not self.c_d > 0:
            raise ValueError(f"c_d must be positive, got {self.c_d}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")

    @property
    def singular(self) -> bool:
        return self.m < 1


@dataclass(frozen=True)
class Sensitivities:
    chi: float = 1.0
    xi: float = 1.0
    mu: float = 0.5

    def __post_init__(self):
        for name in ("chi", "xi", "mu"):
            val = getattr(self, name)
            if not np.isfinite(val) or val < 0:
                raise ValueError(f"{name} must be finite and nonnegative, got {val}")


def eval_D(spec: DiffusivitySpec, u, floor: bool = False):
    """Diffusivity D(u) for scalars or arrays.

    For ``m < 1`` the power law is singular at ``u = 0``: that is an error
    unless ``floor`` is set, in which case ``u`` is floored at ``U_FLOOR``.
    The regularized law always floors.
    """
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("diffusivity evaluated at negative density")
    m = spec.m
    if m == 1.0:
        base = np.full_like(u, spec.c_d)
    elif m > 1.0:
        base = spec.c_d * u ** (m - 1.0)
    else:
        if spec.law == "power" and not floor and np.any(u == 0):
            raise ValueError("power law with m < 1 is singular at u = 0")
        base = spec.c_d * np.maximum(u, U_FLOOR) ** (m - 1.0)
    if spec.law == "power_regularized":
        base = base + spec.epsilon
    return base if base.ndim else float(base)


def eval_H(spec: DiffusivitySpec, s):
    """Primitive H(s) = int_0^s D."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("H is defined for s >= 0 only")
    out = spec.c_d * s ** spec.m / spec.m
    if spec.law == "power_regularized":
        out = out + spec.epsilon * s
    return out if out.ndim else float(out)


def advective_velocity(grid: Grid, v: np.ndarray, w: np.ndarray, sens: Sensitivities,
                       axis: int) -> np.ndarray:
    """chi * dv/dn + xi * dw/dn on the faces normal to ``axis``."""
    return sens.chi * face_gradient(grid, v, axis) + sens.xi * face_gradient(grid, w, axis)


def _pair(f: np.ndarray, axis: int):
    lo = [slice(None)] * f.ndim
    hi = [slice(None)] * f.ndim
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    return f[tuple(lo)], f[tuple(hi)]


def assemble_flux(grid: Grid, u: np.ndarray, v: np.ndarray, w: np.ndarray,
                  spec: DiffusivitySpec, sens: Sensitivities) -> list[np.ndarray]:
    """Total face flux per axis; boundary faces carry zero."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("assemble_flux requires a nonnegative density")
    D = eval_D(spec, u, floor=True)
    fluxes = []
    for axis in range(grid.dim):
        F = np.zeros(grid.face_shape(axis))
        inner = [slice(None)] * grid.dim
        inner[axis] = slice(1, -1)
        inner = tuple(inner)

        uL, uR = _pair(u, axis)
        DL, DR = _pair(D, axis)
        a = advective_velocity(grid, v, w, sens, axis)[inner]
        diffusive = -0.5 * (DL + DR) * (uR - uL) / grid.spacing[axis]
        u_up = np.where(a > 0, uL, uR)
        F[inner] = diffusive + u_up * a
        fluxes.append(F)
    return fluxes


def reaction(u: np.ndarray, w: np.ndarray, mu: float) -> np.ndarray:
    return mu * u * (1.0 - u - w)
