"""Solver library for fractional magnetic Choquard ground states on truncated
grids: penalized energy minimization on the Nehari manifold, with diagnostics
for decay and concentration."""

from .config import (ConfigError, PotentialSpec, ProblemConfig, RescaledGrid,
                     ValidationReport, rescaled_grid, validate_config)
from .diagnostics import (CheckResult, check_concentration, check_decay,
                          check_diamagnetic, check_hartree_bound, check_hls,
                          fit_decay, hls_sharp_constant, mpg_shell_radius)
from .energy import (EnergyContext, EnergyReport, NehariError, NehariScalar,
                     build_limit_context, build_penalized_context,
                     calibrate_penalization, energy, energy_value, gradient,
                     nehari_project, nehari_residual)
from .grids import Field, GridSpec
from .io import (ParsedConfig, RunManifest, load_field, parse_config,
                 report_to_dict, save_field)
from .nonlinearity import (PenalizationParams, PowerNonlinearity, F_truncated,
                           G_eval, calibrate_ell0, f_truncated, g_eval)
from .operators import (HartreeCache, QuadratureOperator, build_hartree_cache,
                        frac_lap_constant, gagliardo_form, magnetic_frac_laplacian,
                        near_zone_weight, riesz_convolve, spectral_frac_laplacian,
                        spectral_seminorm_sq, sphere_area)
from .potentials import (BallRegion, BoxRegion, clipped_quadratic_V, constant_A,
                         constant_V, random_smooth_A, sine_A, zero_A)
from .solver import (SolveReport, SolverError, SolverOptions, phase_gauge,
                     rescale_field, solve_limit, solve_penalized, sweep_epsilon)

__version__ = "0.1.0"
