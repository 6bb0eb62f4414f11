"""Penalized energy functional, its gradient, Nehari projection, and the
calibration of the penalization parameters."""

from __future__ import annotations

from dataclasses import dataclass, replace, field

import numpy as np

from ._fft import fftn, ifftn
from .config import ProblemConfig, PotentialSpec, rescaled_grid
from .grids import Field, GridSpec
from .nonlinearity import (PenalizationParams, PowerNonlinearity, G_eval,
                           calibrate_ell0, g_eval)
from .operators import (HartreeCache, QuadratureOperator, build_hartree_cache,
                        riesz_convolve)
from .sampling import band_limited_field, bump_in_region


class NehariError(RuntimeError):
    pass


@dataclass
class EnergyContext:
    """Everything needed to evaluate the energy of one problem instance.

    Treated as immutable after construction; shared read-only by the solver.
    `pen is None` means the un-truncated nonlinearity (g = f everywhere),
    which is both the pre-calibration state and the limit functional.
    """

    cfg: ProblemConfig
    grid: GridSpec
    V_eps: np.ndarray = field(repr=False)
    lambda_mask: np.ndarray = field(repr=False)
    nl: PowerNonlinearity = field(repr=False)
    hartree: HartreeCache = field(repr=False)
    backend: str = "spectral"
    pen: PenalizationParams | None = None
    quad_op: QuadratureOperator | None = field(default=None, repr=False)
    A0: np.ndarray | None = None
    _spectral_mult: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.backend not in ("spectral", "quadrature"):
            raise ValueError("backend must be 'spectral' or 'quadrature'")
        if self.backend == "spectral" and self._spectral_mult is None:
            self._spectral_mult = self.grid.wavenumber_mesh_sq() ** self.cfg.s

    # ------------- operator pieces

    def apply_op(self, u: np.ndarray) -> np.ndarray:
        if self.backend == "spectral":
            out = ifftn(self._spectral_mult * fftn(u))
            return np.real(out) if not np.iscomplexobj(u) else out
        return self.quad_op.apply(u)

    def seminorm_sq(self, u: np.ndarray) -> float:
        if self.backend == "spectral":
            uf = fftn(u)
            return float(np.sum(self._spectral_mult * np.abs(uf) ** 2)
                         * self.grid.cell_volume() / self.grid.size)
        return self.quad_op.seminorm_sq(u)

    def potential_sq(self, u: np.ndarray) -> float:
        return float(np.sum(self.V_eps * np.abs(u) ** 2) * self.grid.cell_volume())

    def norm_eps_sq(self, u: np.ndarray) -> float:
        return self.seminorm_sq(u) + self.potential_sq(u)

    def precond_multiplier(self) -> np.ndarray:
        return 1.0 / (1.0 + self.grid.wavenumber_mesh_sq() ** self.cfg.s + self.cfg.V0)

    # ------------- nonlinear pieces

    def G_of(self, density: np.ndarray) -> np.ndarray:
        return G_eval(density, self.lambda_mask, self.nl, self.pen)

    def g_of(self, density: np.ndarray) -> np.ndarray:
        return g_eval(density, self.lambda_mask, self.nl, self.pen)

    def hartree_potential(self, density: np.ndarray) -> np.ndarray:
        """K(u) = |x|^(-mu) * G(eps x, |u|^2)."""
        return riesz_convolve(self.G_of(density), self.hartree)

    def with_penalization(self, pen: PenalizationParams, kappa: float | None = None) -> "EnergyContext":
        cfg = self.cfg.with_penalization(pen.ell0, pen.a, kappa if kappa is not None
                                         else self.cfg.kappa)
        return replace(self, cfg=cfg, pen=pen)


def build_penalized_context(cfg: ProblemConfig, pot: PotentialSpec, grid: GridSpec,
                            pen: PenalizationParams | None = None,
                            backend: str = "auto") -> EnergyContext:
    """Context for the rescaled penalized problem on `grid`.

    backend "auto" selects the fast spectral operator whenever the magnetic
    potential vanishes on the grid, else the singular-integral quadrature.
    """
    rg = rescaled_grid(cfg, grid, pot)
    magnetic = pot.magnetic(grid)
    if backend == "auto":
        backend = "quadrature" if magnetic else "spectral"
    if backend == "spectral" and magnetic:
        raise ValueError("spectral backend requires A == 0 on the grid")
    mesh = grid.mesh()
    V_eps = np.asarray(pot.V(cfg.eps * mesh))

    def A_eps(points):
        return np.asarray(pot.A(cfg.eps * np.asarray(points)))

    quad_op = None
    if backend == "quadrature":
        quad_op = QuadratureOperator(grid, cfg.s, A_eps if magnetic else None, mode="free")
    return EnergyContext(
        cfg=cfg, grid=grid, V_eps=V_eps, lambda_mask=rg.lambda_mask,
        nl=PowerNonlinearity(cfg.q), hartree=build_hartree_cache(grid, cfg.mu),
        backend=backend, pen=pen, quad_op=quad_op, A0=pot.A0(grid.dim))


def build_limit_context(cfg: ProblemConfig, grid: GridSpec) -> EnergyContext:
    """Context for the limit problem: V == V0, A == 0, un-truncated f."""
    V = np.full(grid.shape, float(cfg.V0))
    return EnergyContext(
        cfg=replace(cfg, eps=1.0), grid=grid, V_eps=V,
        lambda_mask=np.ones(grid.shape, dtype=bool),
        nl=PowerNonlinearity(cfg.q), hartree=build_hartree_cache(grid, cfg.mu),
        backend="spectral", pen=None, A0=np.zeros(grid.dim))


# ------------------------------------------------------------------ energy

@dataclass(frozen=True)
class EnergyReport:
    seminorm_sq: float
    potential_sq: float
    hartree: float
    J: float
    nehari_residual: float


def energy(u: Field, ctx: EnergyContext) -> EnergyReport:
    """All energy pieces of one field from shared quadratures."""
    v = u.values
    hV = ctx.grid.cell_volume()
    sem = ctx.seminorm_sq(v)
    potq = ctx.potential_sq(v)
    density = np.abs(v) ** 2
    Gv = ctx.G_of(density)
    K = riesz_convolve(Gv, ctx.hartree)
    har = float(np.sum(K * Gv) * hV)
    J = 0.5 * (sem + potq) - 0.25 * har
    resid = sem + potq - float(np.sum(K * ctx.g_of(density) * density) * hV)
    return EnergyReport(sem, potq, har, J, resid)


def energy_value(u: Field, ctx: EnergyContext) -> float:
    v = u.values
    density = np.abs(v) ** 2
    Gv = ctx.G_of(density)
    K = riesz_convolve(Gv, ctx.hartree)
    return 0.5 * ctx.norm_eps_sq(v) - 0.25 * float(np.sum(K * Gv) * ctx.grid.cell_volume())


def gradient(u: Field, ctx: EnergyContext) -> Field:
    """L2 gradient: (-Delta)^s_A u + V_eps u - (K u) g(eps x, |u|^2) u.

    This is the exact discrete gradient of the discrete energy, so central
    finite differences of `energy_value` reproduce it to truncation error.
    """
    v = u.values
    density = np.abs(v) ** 2
    K = ctx.hartree_potential(density)
    out = ctx.apply_op(v) + ctx.V_eps * v - K * ctx.g_of(density) * v
    return Field(out, u.grid)


def nehari_residual(u: Field, ctx: EnergyContext) -> float:
    v = u.values
    density = np.abs(v) ** 2
    K = ctx.hartree_potential(density)
    return ctx.norm_eps_sq(v) - float(np.sum(K * ctx.g_of(density) * density)
                                      * ctx.grid.cell_volume())


# ------------------------------------------------------------------ Nehari

@dataclass(frozen=True)
class NehariScalar:
    t_star: float


def nehari_project(u: Field, ctx: EnergyContext, *, rel_tol: float = 1e-12,
                   max_expansions: int = 60) -> NehariScalar:
    """Unique ray parameter with <J'(t u), t u> = 0, by bracketed bisection.

    phi(t)/t^2 is strictly decreasing from ||u||_eps^2 under the model
    monotonicity, so a sign change bracket is expanded from t = 1 upward.
    """
    v = u.values
    n2 = ctx.norm_eps_sq(v)
    if n2 <= 0:
        raise NehariError("cannot project the zero field")
    density = np.abs(v) ** 2
    hV = ctx.grid.cell_volume()

    def phi_over_t2(t: float) -> float:
        w = (t * t) * density
        K = riesz_convolve(ctx.G_of(w), ctx.hartree)
        return n2 - float(np.sum(K * ctx.g_of(w) * density) * hV)

    hi = 1.0
    n_exp = 0
    while phi_over_t2(hi) > 0:
        hi *= 2.0
        n_exp += 1
        if n_exp > max_expansions:
            raise NehariError("ray has no Nehari point")
    lo = min(1.0, hi / 2)
    while phi_over_t2(lo) < 0:
        lo *= 0.5
        n_exp += 1
        if n_exp > 2 * max_expansions:
            raise NehariError("ray has no Nehari point")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if phi_over_t2(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rel_tol * hi:
            break
    return NehariScalar(0.5 * (lo + hi))


# ------------------------------------------------------------- calibration

def shell_samples(ctx: EnergyContext, shell: float, n: int, seed: int):
    """Random band-limited fields projected to ||u||_eps^2 = shell (the extreme
    shell of the bounded set B), as (field, norm_sq) pairs."""
    rng = np.random.default_rng(seed)
    complex_valued = ctx.backend == "quadrature" and ctx.quad_op is not None \
        and ctx.quad_op.A is not None
    for _ in range(n):
        f = band_limited_field(ctx.grid, rng, complex_valued=complex_valued)
        n2 = ctx.norm_eps_sq(f.values)
        if n2 <= 0:
            continue
        scaled = Field(f.values * np.sqrt(shell / n2), ctx.grid)
        yield scaled, shell


def calibrate_penalization(ctx: EnergyContext, *, n_samples: int = 50, seed: int = 0):
    """Fix the mountain-pass cap, the convolution bound, and the truncation.

    kappa is twice the ray maximum of the energy of the canonical bump
    supported in the blown-up region (where the truncation is inactive, so the
    value does not depend on it); C0 is the sampled supremum of the Hartree
    sup norm over the shell ||u||^2 = 4(kappa+1); ell0 = 4*C0 keeps the
    bound ratio at 1/4; the threshold a = (V0/ell0)^(2/(q-2)) is closed form.

    Returns (params, kappa, C0, canonical bump).
    """
    base = replace(ctx, pen=None)
    rng = np.random.default_rng(seed)
    u0 = bump_in_region(ctx.grid, ctx.lambda_mask, rng)
    if ctx.A0 is not None and np.any(ctx.A0 != 0):
        mesh = ctx.grid.mesh()
        phase = np.exp(1j * np.tensordot(mesh, ctx.A0, axes=([-1], [0])))
        u0 = Field(u0.values * phase, ctx.grid)
    t_star = nehari_project(u0, base).t_star
    kappa = 2.0 * energy_value(Field(t_star * u0.values, ctx.grid), base)
    shell = 4.0 * (kappa + 1.0)

    def hartree_sup(fld: Field) -> float:
        Fv = base.nl.F(np.abs(fld.values) ** 2)
        return float(np.max(np.abs(riesz_convolve(Fv, base.hartree))))

    pen, C0 = calibrate_ell0(shell_samples(base, shell, n_samples, seed),
                             hartree_sup, V0=ctx.cfg.V0, q=ctx.cfg.q, shell=shell)
    return pen, kappa, C0, u0
