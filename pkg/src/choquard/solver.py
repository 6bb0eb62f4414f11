"""Mountain-pass critical points via projected gradient descent on the Nehari
manifold, and the epsilon-sweep concentration experiment."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ._fft import fftn, ifftn
from .config import ProblemConfig, PotentialSpec, validate_config
from .diagnostics import fit_decay
from .energy import (EnergyContext, NehariError, build_limit_context,
                     build_penalized_context, calibrate_penalization, energy_value,
                     gradient, nehari_project, nehari_residual)
from .grids import Field, GridSpec
from .sampling import band_limited_field, gaussian_bump


class SolverError(RuntimeError):
    """Solver failure; carries the last iterate in `.field` when available."""

    def __init__(self, message: str, field_: Field | None = None):
        super().__init__(message)
        self.field = field_


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 2000
    grad_tol: float = 1e-6
    seed: int = 0
    armijo_c1: float = 1e-4
    # absolute slack keeping steps acceptable at the floating-point floor of J
    armijo_slack: float = 1e-12
    bb_tau_min: float = 1e-6
    bb_tau_max: float = 1e6
    max_backtracks: int = 40
    precondition: bool = True

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")


@dataclass
class SolveReport:
    c_eps: float
    x_eps: tuple[float, ...]
    x_eps_index: tuple[int, ...]
    V_at_max: float
    valid_penalization: bool
    decay_exponent: float
    Cfit: float
    iterations: int
    residual: float
    converged: bool
    nehari_residual: float
    sup_norm: float
    boundary_ratio: float
    eps: float
    seed: int
    backend: str
    kappa: float | None = None
    ell0: float | None = None
    a: float | None = None
    warnings: tuple[str, ...] = ()
    error: str | None = None
    decay_status: str = "ok"
    energy_history: tuple[float, ...] = field(default=(), repr=False)


def phase_gauge(u: Field) -> Field:
    """Rotate the global phase so the value at the argmax is real positive."""
    idx = u.argmax_index()
    val = u.values[idx]
    if np.abs(val) == 0:
        return u
    if not u.is_complex:
        return u if val > 0 else Field(-u.values, u.grid)
    return Field(u.values * (np.abs(val) / val), u.grid)


def _boundary_ratio(u: Field) -> float:
    """Largest |u| over the outermost grid layer, relative to the sup norm."""
    g = u.grid
    sup = u.sup_norm()
    if sup == 0:
        return 0.0
    worst = 0.0
    for a in range(g.dim):
        for edge in (0, g.M - 1):
            sl = [slice(None)] * g.dim
            sl[a] = edge
            worst = max(worst, float(np.max(np.abs(u.values[tuple(sl)]))))
    return worst / sup


def _precondition(g: Field, mult: np.ndarray | None) -> Field:
    if mult is None:
        return g
    out = ifftn(mult * fftn(g.values))
    if not g.is_complex:
        out = np.real(out)
    return Field(out, g.grid)


def _l2(vals: np.ndarray, grid: GridSpec) -> float:
    return float(np.sqrt(np.sum(np.abs(vals) ** 2) * grid.cell_volume()))


def minimize_on_nehari(ctx: EnergyContext, start: Field, opts: SolverOptions):
    """Barzilai-Borwein projected gradient descent restricted to the Nehari
    manifold, with Armijo backtracking on the restricted energy."""
    hV = ctx.grid.cell_volume()
    t0 = nehari_project(start, ctx).t_star
    u = Field(t0 * start.values, ctx.grid)
    J = energy_value(u, ctx)
    if not np.isfinite(J):
        raise SolverError("quadrature blow-up", u)
    pmult = ctx.precond_multiplier() if opts.precondition else None
    history = [J]
    tau = 1.0 / (1.0 + ctx.cfg.V0)
    u_prev = d_prev = None
    gn = np.inf
    for it in range(opts.max_iters):
        g = gradient(u, ctx)
        if not np.all(np.isfinite(g.values)):
            raise SolverError("quadrature blow-up", u)
        d = _precondition(g, pmult)
        gn = _l2(d.values, ctx.grid)
        if gn < opts.grad_tol:
            return u, J, it, gn, history
        if u_prev is not None:
            sv = u.values - u_prev.values
            yv = d.values - d_prev.values
            denom = float(np.real(np.sum(np.conj(sv) * yv)) * hV)
            if denom > 0:
                tau = float(np.sum(np.abs(sv) ** 2) * hV) / denom
            tau = min(max(tau, opts.bb_tau_min), opts.bb_tau_max)
        u_prev, d_prev = u, d
        slope = float(np.real(np.sum(np.conj(g.values) * d.values)) * hV)
        accepted = False
        for _ in range(opts.max_backtracks):
            w = u.values - tau * d.values
            try:
                t = nehari_project(Field(w, ctx.grid), ctx).t_star
            except NehariError:
                tau *= 0.5
                continue
            u_new = Field(t * w, ctx.grid)
            J_new = energy_value(u_new, ctx)
            if np.isfinite(J_new) and \
                    J_new <= J - opts.armijo_c1 * tau * slope + opts.armijo_slack:
                accepted = True
                break
            tau *= 0.5
        if not accepted:
            raise SolverError("line search stalled before reaching tolerance", u)
        u, J = u_new, J_new
        history.append(J)
    raise SolverError(f"no convergence in {opts.max_iters} iterations "
                      f"(grad norm {gn:.3e})", u)


def _default_start(ctx: EnergyContext, opts: SolverOptions) -> Field:
    """Gaussian bump at the potential minimizer inside the blown-up region,
    carrying the plane-wave phase of A(0), plus a small seeded perturbation."""
    g = ctx.grid
    mesh = g.mesh()
    inside = ctx.lambda_mask
    V_masked = np.where(inside, ctx.V_eps, np.inf)
    vmin = float(np.min(V_masked))
    at_min = V_masked <= vmin + 1e-12 * max(1.0, abs(vmin))
    # tie-break toward the origin (the natural normalization of the well)
    r2 = np.where(at_min, np.sum(mesh ** 2, axis=-1), np.inf)
    idx = np.unravel_index(int(np.argmin(r2)), g.shape)
    center = mesh[idx]
    pts = mesh.reshape(-1, g.dim)[inside.reshape(-1)]
    extent = float(np.min(pts.max(axis=0) - pts.min(axis=0))) if pts.size else 2 * g.h
    width = max(extent / 6.0, 2 * g.h)
    vals = np.exp(-np.sum((mesh - center) ** 2, axis=-1) / (2 * width ** 2))
    rng = np.random.default_rng(opts.seed)
    pert = band_limited_field(g, rng, complex_valued=False).values
    # symmetrize about the origin (index reflection on the periodic grid) so a
    # degenerate translation-invariant well keeps its flat mode unexcited
    for a in range(g.dim):
        pert = 0.5 * (pert + np.roll(np.flip(pert, axis=a), 1, axis=a))
    vals = vals * (1.0 + 0.01 * pert)
    if ctx.A0 is not None and np.any(ctx.A0 != 0):
        vals = vals * np.exp(1j * np.tensordot(mesh, ctx.A0, axes=([-1], [0])))
    return Field(vals, g)


def _finish_report(u: Field, ctx: EnergyContext, pot: PotentialSpec | None,
                   J: float, iters: int, gn: float, history, opts: SolverOptions,
                   warnings: tuple[str, ...], kappa, converged=True) -> tuple[Field, SolveReport]:
    u = phase_gauge(u)
    idx = u.argmax_index()
    x_eps = u.grid.index_to_point(idx)
    eps = ctx.cfg.eps
    if pot is not None:
        V_at_max = float(np.asarray(pot.V((eps * x_eps)[None, :]))[0])
    else:
        V_at_max = ctx.cfg.V0
    outside = ~ctx.lambda_mask
    if ctx.pen is not None and outside.any():
        sup_out = float(np.max(np.abs(u.values[outside])))
        thresh = min(ctx.pen.a, np.sqrt(ctx.pen.a))
        valid = bool(sup_out < thresh)
    else:
        valid = True
    slope, Cfit, status = fit_decay(u, ctx.cfg.s, idx)
    report = SolveReport(
        c_eps=J, x_eps=tuple(float(x) for x in x_eps), x_eps_index=idx,
        V_at_max=V_at_max, valid_penalization=valid,
        decay_exponent=slope, Cfit=Cfit, iterations=iters, residual=gn,
        converged=converged, nehari_residual=nehari_residual(u, ctx),
        sup_norm=u.sup_norm(), boundary_ratio=_boundary_ratio(u),
        eps=eps, seed=opts.seed, backend=ctx.backend,
        kappa=ctx.cfg.kappa, ell0=ctx.cfg.ell0, a=ctx.cfg.a,
        warnings=warnings, decay_status=status,
        energy_history=tuple(history))
    return u, report


def solve_penalized(cfg: ProblemConfig, pot: PotentialSpec, grid: GridSpec,
                    opts: SolverOptions | None = None, *,
                    pen=None, initial: Field | None = None,
                    calibration_samples: int = 50,
                    validate: bool = True) -> tuple[Field, SolveReport]:
    """Ground state of the penalized rescaled problem at cfg.eps.

    `validate=False` skips the admissibility gate for deliberately degenerate
    diagnostic configurations (e.g. constant V, where the well condition
    fails but the functional is still well defined)."""
    opts = opts or SolverOptions()
    report = validate_config(cfg, pot, grid)
    if validate and not report.ok:
        raise SolverError("configuration violates admissibility: "
                          + "; ".join(report.violations))
    ctx = build_penalized_context(cfg, pot, grid)
    kappa = cfg.kappa
    if pen is None:
        pen, kappa, _, _ = calibrate_penalization(ctx, n_samples=calibration_samples,
                                                  seed=opts.seed)
    ctx = ctx.with_penalization(pen, kappa)
    start = initial if initial is not None else _default_start(ctx, opts)
    u, J, iters, gn, hist = minimize_on_nehari(ctx, start, opts)
    return _finish_report(u, ctx, pot, J, iters, gn, hist, opts, report.warnings, kappa)


def solve_limit(cfg: ProblemConfig, grid: GridSpec,
                opts: SolverOptions | None = None, *,
                initial: Field | None = None) -> tuple[Field, SolveReport]:
    """Ground state of the limit problem (V == V0, A == 0, un-truncated f);
    c_eps in the report is the limit level."""
    opts = opts or SolverOptions()
    ctx = build_limit_context(cfg, grid)
    if initial is None:
        rng = np.random.default_rng(opts.seed)
        pert = band_limited_field(grid, rng, complex_valued=False).values
        for a in range(grid.dim):
            pert = 0.5 * (pert + np.roll(np.flip(pert, axis=a), 1, axis=a))
        base = gaussian_bump(grid, width=1.0).values
        initial = Field(base * (1.0 + 0.01 * pert), grid)
    warnings = (() if cfg.dim >= 3 else
                ("outside theory hypotheses: the existence/concentration theory "
                 "requires N >= 3 and N > 2s; results at this desk scale are "
                 "numerical only",))
    u, J, iters, gn, hist = minimize_on_nehari(ctx, initial, opts)
    return _finish_report(u, ctx, None, J, iters, gn, hist, opts, warnings, None)


def rescale_field(u: Field, ratio: float) -> Field:
    """Warm-start map u(x) -> u(x * ratio) by cubic interpolation on the grid."""
    g = u.grid
    ax_idx = (np.arange(g.M) * ratio + (1 - ratio) * (g.L / g.h))
    coords = np.meshgrid(*([ax_idx] * g.dim), indexing="ij")
    coords = np.stack([c.reshape(-1) for c in coords])

    def interp(arr):
        return ndimage.map_coordinates(arr, coords, order=3,
                                       mode="nearest").reshape(g.shape)
    if u.is_complex:
        vals = interp(np.real(u.values)) + 1j * interp(np.imag(u.values))
    else:
        vals = interp(u.values)
    return Field(vals, g)


def sweep_epsilon(cfg: ProblemConfig, pot: PotentialSpec, grid: GridSpec,
                  eps_list, opts: SolverOptions | None = None,
                  on_solution=None) -> list[SolveReport]:
    """Solve the penalized problem along a descending eps list, warm-starting
    each solve from the previous solution rescaled by eps_new/eps_old.

    Single-eps failures are recorded in their report and the sweep continues.
    """
    opts = opts or SolverOptions()
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 2:
        raise ValueError("sweep needs at least two eps values")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps list must be strictly descending")
    reports: list[SolveReport] = []
    prev_field: Field | None = None
    prev_eps: float | None = None
    for eps in eps_list:
        cfg_e = cfg.with_eps(eps)
        initial = None
        if prev_field is not None:
            initial = rescale_field(prev_field, eps / prev_eps)
        try:
            u, rep = solve_penalized(cfg_e, pot, grid, opts, initial=initial)
            reports.append(rep)
            prev_field, prev_eps = u, eps
            if on_solution is not None:
                on_solution(eps, u, rep)
        except (SolverError, NehariError, ValueError) as exc:
            reports.append(SolveReport(
                c_eps=float("nan"), x_eps=(), x_eps_index=(),
                V_at_max=float("nan"), valid_penalization=False,
                decay_exponent=float("nan"), Cfit=float("nan"),
                iterations=0, residual=float("nan"), converged=False,
                nehari_residual=float("nan"), sup_norm=float("nan"),
                boundary_ratio=float("nan"), eps=eps, seed=opts.seed,
                backend="", error=str(exc)))
    return reports
