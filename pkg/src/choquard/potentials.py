"""Electric/magnetic potential evaluators and penalization regions.

All evaluators are numpy-vectorized over point arrays of shape (..., dim);
V maps to shape (...,), A maps to shape (..., dim).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


# ---------------------------------------------------------------- regions

@dataclass(frozen=True)
class BallRegion:
    center: tuple[float, ...]
    radius: float

    def contains(self, points: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center)
        return np.linalg.norm(points - c, axis=-1) < self.radius

    def bounding_radius(self) -> float:
        return float(np.linalg.norm(self.center) + self.radius)

    def scaled(self, factor: float) -> "BallRegion":
        c = tuple(x * factor for x in self.center)
        return BallRegion(c, self.radius * factor)


@dataclass(frozen=True)
class BoxRegion:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def contains(self, points: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((points > lo) & (points < hi), axis=-1)

    def bounding_radius(self) -> float:
        corners = np.abs(np.array([self.lo, self.hi]))
        return float(np.linalg.norm(np.max(corners, axis=0)))

    def scaled(self, factor: float) -> "BoxRegion":
        return BoxRegion(tuple(x * factor for x in self.lo),
                         tuple(x * factor for x in self.hi))


Region = BallRegion | BoxRegion


# ---------------------------------------------------------------- electric V

def constant_V(V0: float):
    def V(points):
        return np.full(np.asarray(points).shape[:-1], float(V0))
    return V


def clipped_quadratic_V(V0: float, coeff: float = 1.0, cap: float = 4.0):
    """V(x) = V0 + min(coeff*|x|^2, cap); minimum V0 attained at the origin."""
    def V(points):
        r2 = np.sum(np.asarray(points) ** 2, axis=-1)
        return V0 + np.minimum(coeff * r2, cap)
    return V


# ---------------------------------------------------------------- magnetic A

def zero_A(dim: int):
    def A(points):
        return np.zeros(np.asarray(points).shape[:-1] + (dim,))
    return A


def constant_A(vec):
    v = np.asarray(vec, dtype=float)

    def A(points):
        return np.broadcast_to(v, np.asarray(points).shape[:-1] + v.shape).copy()
    return A


def sine_A(amplitude: float, wavelength: float, dim: int):
    """Smooth bounded field: component a oscillates along axis (a+1) mod dim."""
    def A(points):
        p = np.asarray(points)
        comps = [amplitude * np.sin(2 * np.pi * p[..., (a + 1) % dim] / wavelength)
                 for a in range(dim)]
        return np.stack(comps, axis=-1)
    return A


def random_smooth_A(dim: int, L: float, amplitude: float, seed: int, n_modes: int = 3):
    """Band-limited random vector potential, periodic over [-L, L]^dim."""
    rng = np.random.default_rng(seed)
    ks = rng.integers(1, 4, size=(dim, n_modes, dim))
    phases = rng.uniform(0, 2 * np.pi, size=(dim, n_modes))
    amps = rng.normal(size=(dim, n_modes)) * amplitude / np.sqrt(n_modes)

    def A(points):
        p = np.asarray(points)
        out = np.zeros(p.shape[:-1] + (dim,))
        for a in range(dim):
            for m in range(n_modes):
                arg = np.sum(p * ks[a, m] * (np.pi / L), axis=-1) + phases[a, m]
                out[..., a] += amps[a, m] * np.sin(arg)
        return out
    return A
