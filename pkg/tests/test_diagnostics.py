import dataclasses
import json

import numpy as np
import pytest

from choquard import (Field, GridSpec, check_concentration,
                      check_decay, check_diamagnetic, check_hartree_bound,
                      check_hls, constant_A, hls_sharp_constant, random_smooth_A)
from choquard.io import sanitize_json
from choquard.solver import SolveReport


@pytest.fixture(scope="module")
def g96():
    return GridSpec(L=12.0, M=96, dim=1)


def fake_report(eps, V_at_max, converged=True, x=0.0):
    return SolveReport(c_eps=1.0, x_eps=(x,), x_eps_index=(0,), V_at_max=V_at_max,
                       valid_penalization=True, decay_exponent=-2.0, Cfit=1.0,
                       iterations=10, residual=1e-9, converged=converged,
                       nehari_residual=0.0, sup_norm=1.0, boundary_ratio=1e-6,
                       eps=eps, seed=0, backend="spectral")


# ----------------------------------------------------------------- diamagnetic

def test_diamagnetic_equality_real_field(g96):
    u = Field(np.exp(-g96.axis() ** 2 / 4), g96)
    res = check_diamagnetic(u, None, 0.6)
    assert res.passed
    assert res.lhs == pytest.approx(res.rhs, rel=1e-12)


def test_diamagnetic_equality_plane_wave_gauge(g96):
    c = 0.9
    x = g96.axis()
    v = np.exp(-x ** 2 / 4)
    u = Field(np.exp(1j * c * x) * v, g96)
    res = check_diamagnetic(u, constant_A([c]), 0.6)
    assert res.passed
    assert res.lhs == pytest.approx(res.rhs, rel=1e-12)


def test_diamagnetic_strict_on_random_fields(g96):
    rng = np.random.default_rng(1)
    A = random_smooth_A(1, g96.L, 0.6, seed=2)
    for seed in range(5):
        vals = (rng.normal(size=96) + 1j * rng.normal(size=96)) \
            * np.exp(-g96.axis() ** 2 / 16)
        res = check_diamagnetic(Field(vals, g96), A, 0.55, seed=seed)
        assert res.passed
        assert res.lhs < res.rhs  # strict for genuinely complex fields


def test_diamagnetic_reproducible(g96):
    u = Field(np.exp(-g96.axis() ** 2 / 4) * np.exp(1j * g96.axis()), g96)
    A = random_smooth_A(1, g96.L, 0.4, seed=3)
    r1 = check_diamagnetic(u, A, 0.6, seed=42)
    r2 = check_diamagnetic(u, A, 0.6, seed=42)
    assert json.dumps(sanitize_json(dataclasses.asdict(r1))) == \
        json.dumps(sanitize_json(dataclasses.asdict(r2)))


# ------------------------------------------------------------------------ HLS

def test_hls_zero_field(g96):
    from choquard import ProblemConfig
    cfg = ProblemConfig(dim=1, s=0.6, mu=0.5, q=3.0, eps=1.0, V0=1.0)
    res = check_hls(Field(np.zeros(96), g96), cfg)
    assert res.passed


def test_hls_gaussian_below_sharp(g96):
    from choquard import ProblemConfig
    cfg = ProblemConfig(dim=1, s=0.6, mu=0.5, q=3.0, eps=1.0, V0=1.0)
    res = check_hls(Field(np.exp(-g96.axis() ** 2), g96), cfg)
    assert res.passed
    assert res.lhs < res.context["sharp"]  # strictly below even without slack


def test_hls_pairing_decreases_with_separation():
    from choquard import ProblemConfig, build_hartree_cache, riesz_convolve
    grid = GridSpec(L=16.0, M=256, dim=1)
    cfg = ProblemConfig(dim=1, s=0.6, mu=0.5, q=3.0, eps=1.0, V0=1.0)
    cache = build_hartree_cache(grid, cfg.mu)
    x = grid.axis()
    vals = []
    for d in (1.0, 2.0, 4.0):
        phi = np.exp(-(x - d / 2) ** 2 * 8) + np.exp(-(x + d / 2) ** 2 * 8)
        vals.append(float(np.sum(riesz_convolve(phi, cache) * phi) * grid.h))
    assert vals[0] > vals[1] > vals[2]


def test_hls_ratio_stable_under_refinement():
    from choquard import ProblemConfig
    cfg = ProblemConfig(dim=1, s=0.6, mu=0.5, q=3.0, eps=1.0, V0=1.0)
    ratios = []
    for M in (128, 256):
        grid = GridSpec(L=12.0, M=M, dim=1)
        res = check_hls(Field(np.exp(-grid.axis() ** 2), grid), cfg)
        ratios.append(res.lhs)
    assert abs(ratios[1] - ratios[0]) < 0.05 * ratios[0]


def test_hls_sharp_constant_value():
    # N=1, mu=0.5: pi^(1/4) * Gamma(1/4)/Gamma(3/4) * (Gamma(1/2)/Gamma(1))^(-1/2)
    from scipy.special import gamma as G
    want = np.pi ** 0.25 * G(0.25) / G(0.75) * (G(0.5) / G(1.0)) ** (-0.5)
    assert hls_sharp_constant(1, 0.5) == pytest.approx(want, rel=1e-12)


# -------------------------------------------------------------- hartree bound

def test_hartree_bound_fresh_samples(plain_ctx):
    ctx, _, _ = plain_ctx
    res = check_hartree_bound(ctx, n_samples=25, seed=777)
    assert res.passed
    assert res.lhs <= 0.25 + 0.1  # calibration ratio plus sampling slack


def test_hartree_bound_excludes_outside_B(plain_ctx):
    ctx, _, _ = plain_ctx
    shell = 4.0 * (ctx.cfg.kappa + 1.0)
    big = Field(np.exp(-ctx.grid.axis() ** 2 / 9), ctx.grid)
    n2 = ctx.norm_eps_sq(big.values)
    big = Field(big.values * np.sqrt(10 * shell / n2), ctx.grid)  # 10x the shell
    res = check_hartree_bound(ctx, n_samples=10, seed=5, extra_fields=[big])
    assert res.passed
    assert res.context["excluded"] == 1


def test_hartree_bound_requires_calibration(plain_ctx):
    ctx, _, _ = plain_ctx
    from dataclasses import replace
    with pytest.raises(ValueError):
        check_hartree_bound(replace(ctx, pen=None))


# ----------------------------------------------------------------------- decay

def test_decay_synthetic_envelope_recovers_slope():
    grid = GridSpec(L=40.0, M=512, dim=1)
    s = 0.5
    power = 1 + 2 * s
    r = np.abs(grid.axis())
    u = Field(1.0 / (1.0 + r ** power), grid)
    res = check_decay(u, 1.0, u.argmax_index(), s)
    assert res.passed
    assert res.context["slope"] == pytest.approx(-power, abs=0.1)
    assert res.context["slope_ok"]


def test_decay_gaussian_steeper_flag():
    grid = GridSpec(L=40.0, M=512, dim=1)
    u = Field(np.exp(-grid.axis() ** 2 / 2), grid)
    res = check_decay(u, 1.0, u.argmax_index(), 0.5)
    assert res.passed
    assert res.context["steeper"] and not res.context["slope_ok"]


def test_decay_inconclusive_without_tail():
    grid = GridSpec(L=20.0, M=128, dim=1)
    u = Field(np.full(128, 0.5) + 0.5 * np.cos(grid.axis()), grid)
    res = check_decay(u, 1.0, u.argmax_index(), 0.5)
    assert not res.passed
    assert res.context["status"] == "inconclusive"


# -------------------------------------------------------------- concentration

def make_conc_inputs():
    from choquard import BallRegion, PotentialSpec, ProblemConfig, clipped_quadratic_V
    grid = GridSpec(L=32.0, M=128, dim=1)
    cfg = ProblemConfig(dim=1, s=0.6, mu=0.5, q=3.0, eps=0.125, V0=1.0)
    pot = PotentialSpec(V=clipped_quadratic_V(1.0), A=None,
                        region=BallRegion((0.0,), 1.0), V0=1.0)
    return grid, cfg, pot


def test_concentration_monotone_gaps_pass():
    grid, cfg, pot = make_conc_inputs()
    reports = [fake_report(0.5, 1.05), fake_report(0.25, 1.01),
               fake_report(0.125, 1.001)]
    res = check_concentration(reports, pot, cfg, grid)
    assert res.passed
    assert res.context["monotone"]


def test_concentration_degenerate_constant_gaps():
    grid, cfg, pot = make_conc_inputs()
    reports = [fake_report(e, 1.0) for e in (0.5, 0.25, 0.125)]
    res = check_concentration(reports, pot, cfg, grid)
    assert res.passed


def test_concentration_skips_diverged_with_flag():
    grid, cfg, pot = make_conc_inputs()
    reports = [fake_report(0.5, 1.05), fake_report(0.25, float("nan"), converged=False),
               fake_report(0.125, 1.001)]
    res = check_concentration(reports, pot, cfg, grid)
    assert res.context["partial_coverage"]


def test_concentration_needs_three_entries():
    grid, cfg, pot = make_conc_inputs()
    with pytest.raises(ValueError):
        check_concentration([fake_report(0.5, 1.0)], pot, cfg, grid)


def test_concentration_fails_when_argmax_outside():
    grid, cfg, pot = make_conc_inputs()
    reports = [fake_report(0.5, 1.05), fake_report(0.25, 1.01),
               fake_report(0.125, 1.001, x=30.0)]  # eps*x = 3.75 outside ball
    res = check_concentration(reports, pot, cfg, grid)
    assert not res.passed
