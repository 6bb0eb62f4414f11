import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from choquard import (BallRegion, BoxRegion, ConfigError, GridSpec, PotentialSpec,
                      ProblemConfig, clipped_quadratic_V, constant_V,
                      rescaled_grid, validate_config)


def make_pot(dim, V=None, radius=1.0):
    return PotentialSpec(V=V or clipped_quadratic_V(1.0), A=None,
                         region=BallRegion((0.0,) * dim, radius), V0=1.0)


def test_admissible_3d_example():
    cfg = ProblemConfig(dim=3, s=0.75, mu=1.0, q=2.5, eps=0.5, V0=1.0)
    grid = GridSpec(L=8.0, M=8, dim=3)
    rep = validate_config(cfg, make_pot(3), grid)
    assert rep.ok, rep.violations
    # direct arithmetic of the bound: 2(N-mu)/(N-2s) = 2*2/1.5
    assert cfg.q_upper_bound == pytest.approx(2 * (3 - 1.0) / (3 - 1.5))
    assert 2 < cfg.q < cfg.q_upper_bound


def test_mu_exceeds_2s_violation():
    cfg = ProblemConfig(dim=3, s=0.75, mu=1.6, q=2.5, eps=0.5, V0=1.0)
    grid = GridSpec(L=8.0, M=8, dim=3)
    rep = validate_config(cfg, make_pot(3), grid)
    assert any("mu must lie in (0, 2s)" in v for v in rep.violations)


def test_constant_potential_violates_well_structure():
    cfg = ProblemConfig(dim=1, s=0.6, mu=0.5, q=3.0, eps=0.5, V0=1.0)
    grid = GridSpec(L=8.0, M=64, dim=1)
    rep = validate_config(cfg, make_pot(1, V=constant_V(1.0)), grid)
    assert any("strictly lower minimum" in v for v in rep.violations)


def test_desk_scale_warning_flags():
    cfg = ProblemConfig(dim=1, s=0.6, mu=0.5, q=3.0, eps=0.5, V0=1.0)
    grid = GridSpec(L=8.0, M=64, dim=1)
    rep = validate_config(cfg, make_pot(1), grid)
    assert rep.ok
    assert any("outside theory hypotheses" in w for w in rep.warnings)


def test_calibration_consistency_check():
    cfg = ProblemConfig(dim=1, s=0.6, mu=0.5, q=3.0, eps=0.5, V0=1.0,
                        ell0=4.0, a=(1.0 / 4.0) ** 2, kappa=1.0)
    grid = GridSpec(L=8.0, M=64, dim=1)
    assert validate_config(cfg, make_pot(1), grid).ok
    bad = ProblemConfig(dim=1, s=0.6, mu=0.5, q=3.0, eps=0.5, V0=1.0,
                        ell0=4.0, a=0.9, kappa=1.0)
    rep = validate_config(bad, make_pot(1), grid)
    assert any("f(a) = V0/ell0" in v for v in rep.violations)


def test_rescaled_grid_ball_blowup():
    cfg = ProblemConfig(dim=1, s=0.6, mu=0.5, q=3.0, eps=0.5, V0=1.0)
    grid = GridSpec(L=8.0, M=64, dim=1)
    rg = rescaled_grid(cfg, grid, make_pot(1))
    x = grid.axis()
    # Lambda_eps = ball of radius 1/eps = 2
    assert np.array_equal(rg.lambda_mask, np.abs(x) < 2.0)


def test_rescaled_grid_identity_at_eps_one():
    cfg = ProblemConfig(dim=1, s=0.6, mu=0.5, q=3.0, eps=1.0, V0=1.0)
    grid = GridSpec(L=8.0, M=64, dim=1)
    rg = rescaled_grid(cfg, grid, make_pot(1))
    assert np.array_equal(rg.lambda_mask, np.abs(grid.axis()) < 1.0)


def test_rescaled_grid_region_leaves_domain():
    cfg = ProblemConfig(dim=1, s=0.6, mu=0.5, q=3.0, eps=0.1, V0=1.0)
    grid = GridSpec(L=5.0, M=64, dim=1)
    with pytest.raises(ConfigError, match="penalization region leaves domain"):
        rescaled_grid(cfg, grid, make_pot(1))


def test_box_region_and_origin_requirement():
    cfg = ProblemConfig(dim=2, s=0.6, mu=0.5, q=3.0, eps=0.5, V0=1.0)
    grid = GridSpec(L=8.0, M=16, dim=2)
    good = PotentialSpec(V=clipped_quadratic_V(1.0), A=None,
                         region=BoxRegion((-1.0, -1.0), (1.0, 1.0)), V0=1.0)
    assert validate_config(cfg, good, grid).ok
    off = PotentialSpec(V=clipped_quadratic_V(1.0), A=None,
                        region=BoxRegion((0.5, 0.5), (1.5, 1.5)), V0=1.0)
    rep = validate_config(cfg, off, grid)
    assert not rep.ok


@settings(max_examples=60, deadline=None)
@given(s=st.floats(0.3, 0.95), mu_frac=st.floats(0.05, 0.95),
       q_frac=st.floats(0.05, 0.95))
def test_hls_exponent_inside_open_interval(s, mu_frac, q_frac):
    # For every admissible (s, mu, q) with N=3 > 2s the pairing exponent
    # tq with t = 2N/(2N - mu) lies in (2, 2*_s).
    N = 3
    if N <= 2 * s:
        return
    mu = mu_frac * min(2 * s, N)
    cfg = ProblemConfig(dim=N, s=s, mu=mu, q=2.0, eps=1.0, V0=1.0)
    qhi = cfg.q_upper_bound
    q = 2 + q_frac * (qhi - 2)
    if not (2 < q < qhi):
        return
    t = 2 * N / (2 * N - mu)
    assert 2 < t * q < 2 * N / (N - 2 * s)


@settings(max_examples=40, deadline=None)
@given(e1=st.floats(0.05, 1.0), e2=st.floats(0.05, 1.0),
       data=st.data())
def test_region_mask_monotone_in_eps(e1, e2, data):
    if e1 == e2:
        return
    lo, hi = min(e1, e2), max(e1, e2)
    kind = data.draw(st.sampled_from(["ball", "box"]))
    if kind == "ball":
        region = BallRegion((0.2,), 0.7)
    else:
        region = BoxRegion((-0.4,), (0.9,))
    grid = GridSpec(L=40.0, M=64, dim=1)
    pts = grid.points()
    m_lo = region.contains(lo * pts)
    m_hi = region.contains(hi * pts)
    # smaller eps blows the region up: mask at hi is contained in mask at lo
    assert np.all(~m_hi | m_lo)
