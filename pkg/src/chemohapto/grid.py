"""
Structured cell-centered grids with homogeneous Neumann boundaries.

Cell fields are plain numpy arrays of shape ``grid.shape``.  Face arrays
along axis ``a`` have ``cells[a] + 1`` entries on that axis; the first and
last entries are the boundary faces.  Mirror ghost cells make every
boundary-face gradient vanish, so boundary fluxes are identically zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform box grid in 1 or 2 dimensions."""

    cells: tuple[int, ...]
    lengths: tuple[float, ...]
    spacing: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        cells = tuple(int(n) for n in np.atleast_1d(self.cells))
        lengths = tuple(float(L) for L in np.atleast_1d(self.lengths))
        if len(cells) not in (1, 2):
            raise ValueError(f"grid dimension must be 1 or 2, got {len(cells)}")
        if len(lengths) == 1 and len(cells) == 2:
            lengths = lengths * 2
        if len(lengths) != len(cells):
            raise ValueError("lengths and cells must have the same number of axes")
        if any(n < 1 for n in cells):
            raise ValueError(f"cells per axis must be positive, got {cells}")
        if any(not np.isfinite(L) or L <= 0 for L in lengths):
            raise ValueError(f"lengths must be positive, got {lengths}")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "spacing", tuple(L / n for L, n in zip(lengths, cells)))

    @classmethod
    def uniform(cls, dim: int, n: int, length: float = 1.0) -> "Grid":
        return cls((n,) * dim, (length,) * dim)

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells

    @property
    def size(self) -> int:
        return int(np.prod(self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def measure(self) -> float:
        return float(np.prod(self.lengths))

    def axis_centers(self, axis: int) -> np.ndarray:
        h = self.spacing[axis]
        return (np.arange(self.cells[axis]) + 0.5) * h

    def axis_faces(self, axis: int) -> np.ndarray:
        return np.arange(self.cells[axis] + 1) * self.spacing[axis]

    def centers(self) -> tuple[np.ndarray, ...]:
        """Cell-center coordinates, one broadcast array per axis (``indexing='ij'``)."""
        return tuple(np.meshgrid(*[self.axis_centers(a) for a in range(self.dim)], indexing="ij"))

    def face_centers(self, axis: int) -> tuple[np.ndarray, ...]:
        """Coordinates of the faces normal to ``axis``."""
        coords = [self.axis_centers(a) for a in range(self.dim)]
        coords[axis] = self.axis_faces(axis)
        return tuple(np.meshgrid(*coords, indexing="ij"))

    def face_shape(self, axis: int) -> tuple[int, ...]:
        shape = list(self.cells)
        shape[axis] += 1
        return tuple(shape)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def full(self, value: float) -> np.ndarray:
        return np.full(self.shape, float(value))

    def integrate(self, f: np.ndarray) -> float:
        return float(np.sum(f) * self.cell_volume)

    def check_field(self, f, name: str = "field") -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != self.shape:
            raise ValueError(f"{name} has shape {f.shape}, grid expects {self.shape}")
        if not np.all(np.isfinite(f)):
            raise ValueError(f"{name} contains non-finite values")
        return f

    def _check_axis(self, axis: int):
        if not 0 <= axis < self.dim:
            raise ValueError(f"axis {axis} out of range for a {self.dim}D grid")


def _slice(dim: int, axis: int, s: slice) -> tuple:
    idx = [slice(None)] * dim
    idx[axis] = s
    return tuple(idx)


def face_gradient(grid: Grid, f: np.ndarray, axis: int) -> np.ndarray:
    """Normal derivative of ``f`` on faces normal to ``axis``; zero on boundary faces."""
    grid._check_axis(axis)
    f = np.asarray(f, dtype=float)
    if f.shape != grid.shape:
        raise ValueError(f"field has shape {f.shape}, grid expects {grid.shape}")
    d = grid.dim
    out = np.zeros(grid.face_shape(axis))
    out[_slice(d, axis, slice(1, -1))] = (
        f[_slice(d, axis, slice(1, None))] - f[_slice(d, axis, slice(None, -1))]
    ) / grid.spacing[axis]
    return out


def face_average(grid: Grid, f: np.ndarray, axis: int) -> np.ndarray:
    """Arithmetic mean of the two cells adjacent to each face (mirror value on the boundary)."""
    grid._check_axis(axis)
    d = grid.dim
    out = np.empty(grid.face_shape(axis))
    out[_slice(d, axis, slice(1, -1))] = 0.5 * (
        f[_slice(d, axis, slice(None, -1))] + f[_slice(d, axis, slice(1, None))]
    )
    out[_slice(d, axis, slice(0, 1))] = f[_slice(d, axis, slice(0, 1))]
    out[_slice(d, axis, slice(-1, None))] = f[_slice(d, axis, slice(-1, None))]
    return out


def divergence(grid: Grid, fluxes: Sequence[np.ndarray]) -> np.ndarray:
    """Conservative divergence of face fluxes, one array per axis.

    Boundary-face entries of the flux arrays are ignored: with Neumann
    walls they carry no flux, which keeps the volume-weighted sum of the
    result at zero.
    """
    if len(fluxes) != grid.dim:
        raise ValueError(f"expected {grid.dim} flux arrays, got {len(fluxes)}")
    out = np.zeros(grid.shape)
    d = grid.dim
    for axis, F in enumerate(fluxes):
        F = np.asarray(F, dtype=float)
        if F.shape != grid.face_shape(axis):
            raise ValueError(
                f"flux along axis {axis} has shape {F.shape}, expected {grid.face_shape(axis)}"
            )
        h = grid.spacing[axis]
        # boundary faces are walls: only interior faces contribute
        Fi = F[_slice(d, axis, slice(1, -1))] / h
        out[_slice(d, axis, slice(None, -1))] += Fi
        out[_slice(d, axis, slice(1, None))] -= Fi
    return out


def laplacian(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Second-difference Laplacian with mirror ghosts (3-point in 1D, 5-point in 2D)."""
    return divergence(grid, [face_gradient(grid, f, a) for a in range(grid.dim)])


def cell_gradient(grid: Grid, f: np.ndarray) -> tuple[np.ndarray, ...]:
    """Cell-centered gradient components from the average of the two bounding face gradients."""
    d = grid.dim
    comps = []
    for a in range(d):
        g = face_gradient(grid, f, a)
        comps.append(0.5 * (g[_slice(d, a, slice(None, -1))] + g[_slice(d, a, slice(1, None))]))
    return tuple(comps)


def gradient_magnitude(grid: Grid, f: np.ndarray) -> np.ndarray:
    comps = cell_gradient(grid, f)
    return np.sqrt(sum(c * c for c in comps))
