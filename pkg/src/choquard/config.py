"""Problem data and validation of the standing admissibility assumptions."""

from __future__ import annotations

from dataclasses import dataclass, replace, field

import numpy as np

from .grids import GridSpec
from .potentials import Region

OUTSIDE_THEORY_WARNING = (
    "outside theory hypotheses: the existence/concentration theory requires "
    "N >= 3 and N > 2s; results at this desk scale are numerical only"
)


class ConfigError(ValueError):
    """Raised when a configuration cannot be used at all (vs. reported violations)."""


@dataclass(frozen=True)
class ProblemConfig:
    """Scalar problem data.

    ell0, a and kappa are produced by penalization calibration and are None
    until then; a satisfies f(a) = V0/ell0 in closed form for the power model.
    """

    dim: int
    s: float
    mu: float
    q: float
    eps: float
    V0: float
    ell0: float | None = None
    a: float | None = None
    kappa: float | None = None

    def with_penalization(self, ell0: float, a: float, kappa: float) -> "ProblemConfig":
        return replace(self, ell0=ell0, a=a, kappa=kappa)

    def with_eps(self, eps: float) -> "ProblemConfig":
        return replace(self, eps=eps)

    @property
    def critical_exponent(self) -> float:
        """2*_s = 2N/(N-2s), defined only when N > 2s."""
        if self.dim <= 2 * self.s:
            return float("inf")
        return 2.0 * self.dim / (self.dim - 2.0 * self.s)

    @property
    def q_upper_bound(self) -> float:
        """2(N-mu)/(N-2s), the admissible growth ceiling when N > 2s."""
        if self.dim <= 2 * self.s:
            return float("inf")
        return 2.0 * (self.dim - self.mu) / (self.dim - 2.0 * self.s)


@dataclass(frozen=True)
class PotentialSpec:
    """Evaluators for the electric potential V, magnetic potential A, and the
    penalization region."""

    V: object  # callable points(...,dim) -> (...)
    A: object | None  # callable points(...,dim) -> (...,dim), or None for A == 0
    region: Region
    V0: float

    def A0(self, dim: int) -> np.ndarray:
        if self.A is None:
            return np.zeros(dim)
        return np.asarray(self.A(np.zeros((1, dim))))[0]

    def magnetic(self, grid: GridSpec) -> bool:
        """True when A is present and not identically zero on the grid."""
        if self.A is None:
            return False
        vals = np.asarray(self.A(grid.points()))
        return bool(np.max(np.abs(vals)) > 0)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]
    warnings: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class RescaledGrid:
    """Grid for the rescaled equation, with the blown-up region marked."""

    grid: GridSpec
    lambda_mask: np.ndarray = field(repr=False)
    eps: float

    def __post_init__(self):
        if self.lambda_mask.shape != self.grid.shape:
            raise ValueError("lambda mask does not match grid shape")


def boundary_mask(inside: np.ndarray) -> np.ndarray:
    """Sampled boundary of the open region: cells outside the predicate whose
    axis neighbors straddle it."""
    out = np.zeros_like(inside)
    for a in range(inside.ndim):
        nb_f = np.roll(inside, -1, axis=a)
        nb_b = np.roll(inside, 1, axis=a)
        out |= ~inside & (nb_f | nb_b)
    return out


def validate_config(cfg: ProblemConfig, pot: PotentialSpec, grid: GridSpec) -> ValidationReport:
    """Check every standing assumption; violations are reported, never raised."""
    bad: list[str] = []
    warn: list[str] = []

    if not (0.0 < cfg.s < 1.0):
        bad.append("s must lie in (0, 1)")
    if not (0.0 < cfg.mu < 2.0 * cfg.s):
        bad.append("mu must lie in (0, 2s)")
    if cfg.mu >= cfg.dim:
        bad.append("mu must be below the dimension N for kernel integrability")
    if not cfg.eps > 0:
        bad.append("eps must be positive")
    if not cfg.V0 > 0:
        bad.append("V0 must be positive")
    if grid.dim != cfg.dim:
        bad.append("grid dimension does not match problem dimension")

    if cfg.q <= 2.0:
        bad.append("q must exceed 2")
    elif cfg.dim > 2 * cfg.s:
        if cfg.q >= cfg.q_upper_bound:
            bad.append(f"q must lie in (2, 2(N-mu)/(N-2s)) = (2, {cfg.q_upper_bound:.6g})")
    else:
        warn.append("q upper bound skipped (N <= 2s); " + OUTSIDE_THEORY_WARNING)

    if cfg.dim < 3:
        warn.append(OUTSIDE_THEORY_WARNING)

    # Hardy-Littlewood-Sobolev pairing with t = 2N/(2N - mu) requires tq in (2, 2*_s).
    if 0 < cfg.mu < cfg.dim and cfg.q > 2:
        t = 2.0 * cfg.dim / (2.0 * cfg.dim - cfg.mu)
        tq = t * cfg.q
        if tq <= 2.0:
            bad.append("HLS pairing exponent tq must exceed 2")
        if cfg.dim > 2 * cfg.s and tq >= cfg.critical_exponent:
            bad.append(f"HLS pairing exponent tq = {tq:.6g} must stay below 2*_s = "
                       f"{cfg.critical_exponent:.6g}")

    # potential floor and well structure on the rescaled grid
    pts = grid.points()
    vvals = np.asarray(pot.V(cfg.eps * pts))
    if np.min(vvals) < cfg.V0 - 1e-12 * max(1.0, abs(cfg.V0)):
        bad.append("V falls below the stated floor V0 on the grid")

    inside = pot.region.contains(cfg.eps * pts).reshape(grid.shape)
    if not inside.any():
        bad.append("penalization region contains no grid point")
    else:
        if not bool(pot.region.contains(np.zeros((1, grid.dim)))[0]):
            bad.append("penalization region must contain the origin")
        bnd = boundary_mask(inside).reshape(-1)
        vgrid = vvals.reshape(-1)
        v_in = float(np.min(vgrid[inside.reshape(-1)]))
        if bnd.any():
            v_bnd = float(np.min(vgrid[bnd]))
            if not v_bnd > v_in:
                bad.append("V must attain a strictly lower minimum inside the region "
                           "than on its sampled boundary")
        else:
            bad.append("penalization region boundary is not resolved by the grid")

    # the blown-up region must fit strictly inside the computational box
    if pot.region.bounding_radius() / cfg.eps >= grid.L:
        bad.append("penalization region leaves domain")

    if (cfg.ell0 is None) != (cfg.a is None):
        bad.append("ell0 and a must be calibrated together")
    if cfg.ell0 is not None and cfg.a is not None:
        fa = max(cfg.a, 0.0) ** ((cfg.q - 2.0) / 2.0)
        target = cfg.V0 / cfg.ell0
        if abs(fa - target) > 1e-10 * max(1.0, abs(target)):
            bad.append("penalization threshold a does not satisfy f(a) = V0/ell0")

    return ValidationReport(tuple(bad), tuple(warn))


def rescaled_grid(cfg: ProblemConfig, grid: GridSpec, pot: PotentialSpec) -> RescaledGrid:
    """Grid for the rescaled equation x -> eps*x, with the region mask attached.

    Raises ConfigError when the blown-up region does not fit the box.
    """
    if pot.region.bounding_radius() / cfg.eps >= grid.L:
        raise ConfigError("penalization region leaves domain")
    mask = pot.region.contains(cfg.eps * grid.points()).reshape(grid.shape)
    return RescaledGrid(grid, mask, cfg.eps)
