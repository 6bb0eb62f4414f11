"""Shared fixtures and independent oracles for the test suite."""

import numpy as np
import pytest

from choquard import (BallRegion, GridSpec, Field, PotentialSpec, ProblemConfig,
                      build_penalized_context, calibrate_penalization,
                      clipped_quadratic_V, constant_V, random_smooth_A)


# ----------------------------------------------------------------- oracles

def brute_force_riesz(vals: np.ndarray, kernel: np.ndarray, hV: float) -> np.ndarray:
    """Direct O(n^2) circular summation against the sampled kernel table:
    out[i] = sum_j kernel[(i - j) mod M, ...] * vals[j] * h^N."""
    shape = vals.shape
    M = shape[0]
    dim = vals.ndim
    idx = np.indices(shape).reshape(dim, -1)
    flat = vals.reshape(-1)
    out = np.zeros(len(flat))
    for a in range(len(flat)):
        ia = idx[:, a]
        delta = tuple((ia[d] - idx[d]) % M for d in range(dim))
        out[a] = np.sum(kernel[delta] * flat)
    return (out * hV).reshape(shape)


def nehari_closed_form(u: Field, ctx) -> float:
    """Analytic ray parameter for the pure power model on fields supported in
    the region: the pairing is t^2 ||u||^2 - (2/q) t^(2q) D with
    D = sum (|x|^-mu * |u|^q) |u|^q h^N, so t* = (q ||u||^2 / (2D))^(1/(2q-2))."""
    from choquard import riesz_convolve
    q = ctx.cfg.q
    n2 = ctx.norm_eps_sq(u.values)
    p = np.abs(u.values) ** q
    D = float(np.sum(riesz_convolve(p, ctx.hartree) * p) * ctx.grid.cell_volume())
    return (q * n2 / (2.0 * D)) ** (1.0 / (2.0 * q - 2.0))


def central_diff_energy(ctx, u: Field, v: Field, delta: float = 1e-6) -> float:
    from choquard import energy_value
    up = Field(u.values + delta * v.values, u.grid)
    um = Field(u.values - delta * v.values, u.grid)
    return (energy_value(up, ctx) - energy_value(um, ctx)) / (2 * delta)


def align_phase(u: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Rotate u by the global phase best matching ref."""
    inner = np.sum(np.conj(ref) * u)
    if np.abs(inner) == 0:
        return u
    return u * (np.abs(inner) / inner)


# ---------------------------------------------------------------- fixtures

@pytest.fixture(scope="session")
def grid1d() -> GridSpec:
    return GridSpec(L=16.0, M=128, dim=1)


@pytest.fixture(scope="session")
def magnetic_ctx(grid1d):
    """Calibrated penalized context with a genuine magnetic potential (1D)."""
    cfg = ProblemConfig(dim=1, s=0.6, mu=0.5, q=3.0, eps=0.5, V0=1.0)
    pot = PotentialSpec(V=clipped_quadratic_V(1.0, coeff=1.0, cap=4.0),
                        A=random_smooth_A(1, grid1d.L * cfg.eps, 0.4, seed=11),
                        region=BallRegion((0.0,), 1.0), V0=1.0)
    ctx = build_penalized_context(cfg, pot, grid1d)
    pen, kappa, C0, u0 = calibrate_penalization(ctx, n_samples=20, seed=3)
    return ctx.with_penalization(pen, kappa), pot, u0


@pytest.fixture(scope="session")
def plain_ctx(grid1d):
    """Calibrated penalized context with A == 0 (spectral backend)."""
    cfg = ProblemConfig(dim=1, s=0.6, mu=0.5, q=3.0, eps=0.5, V0=1.0)
    pot = PotentialSpec(V=clipped_quadratic_V(1.0, coeff=1.0, cap=4.0),
                        A=None, region=BallRegion((0.0,), 1.0), V0=1.0)
    ctx = build_penalized_context(cfg, pot, grid1d)
    pen, kappa, C0, u0 = calibrate_penalization(ctx, n_samples=20, seed=3)
    return ctx.with_penalization(pen, kappa), pot, u0


@pytest.fixture(scope="session")
def allcover_pot():
    """Region covering every grid point of a 1D grid while fitting the box."""
    def make(grid: GridSpec, eps: float) -> PotentialSpec:
        radius = eps * (grid.L - grid.h / 4)
        return PotentialSpec(V=constant_V(1.0), A=None,
                             region=BallRegion((0.0,) * grid.dim, radius), V0=1.0)
    return make
