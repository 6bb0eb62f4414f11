"""Uniform periodic grids on the truncated box [-L, L]^N."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid with M samples per axis on [-L, L]^N, spacing h = 2L/M.

    Index i on an axis maps to coordinate -L + i*h; the grid is periodic,
    so the point +L is identified with -L and not stored.
    """

    L: float
    M: int
    dim: int = 1

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("grid extent L must be positive")
        if self.M < 8 or self.M % 2 != 0:
            raise ValueError("grid points M must be even and >= 8")
        if self.dim not in (1, 2, 3):
            raise ValueError("only dimensions 1, 2, 3 are supported")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.M

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.M,) * self.dim

    @property
    def size(self) -> int:
        return self.M ** self.dim

    def axis(self) -> np.ndarray:
        """Coordinates along one axis."""
        return -self.L + self.h * np.arange(self.M)

    def mesh(self) -> np.ndarray:
        """Coordinates of every grid point, shape (M, ..., M, dim)."""
        ax = self.axis()
        return np.stack(np.meshgrid(*([ax] * self.dim), indexing="ij"), axis=-1)

    def points(self) -> np.ndarray:
        """Flat list of grid points, shape (M^dim, dim)."""
        return self.mesh().reshape(-1, self.dim)

    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers along one axis for the period-2L torus."""
        return 2.0 * np.pi * np.fft.fftfreq(self.M, d=self.h)

    def wavenumber_mesh_sq(self) -> np.ndarray:
        """|xi|^2 on the full wavenumber mesh, shape (M, ..., M)."""
        xi = self.wavenumbers()
        grids = np.meshgrid(*([xi] * self.dim), indexing="ij")
        return sum(g ** 2 for g in grids)

    def index_to_point(self, index: int | tuple[int, ...]) -> np.ndarray:
        idx = np.atleast_1d(np.array(np.unravel_index(index, self.shape)
                                     if np.isscalar(index) else index))
        return -self.L + self.h * idx.astype(float)

    def cell_volume(self) -> float:
        return self.h ** self.dim


@dataclass(frozen=True)
class Field:
    """Complex- or real-valued function sampled on a GridSpec."""

    values: np.ndarray
    grid: GridSpec = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != self.grid.shape:
            raise ValueError(f"field shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def modulus(self) -> "Field":
        return Field(np.abs(self.values), self.grid)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell_volume()))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def argmax_index(self) -> tuple[int, ...]:
        """Grid index of the global maximum of |u|, first index on ties."""
        flat = int(np.argmax(np.abs(self.values)))
        return tuple(int(i) for i in np.unravel_index(flat, self.grid.shape))

    def argmax_point(self) -> np.ndarray:
        return self.grid.index_to_point(self.argmax_index())
