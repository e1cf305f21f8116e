import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import beta_half
from rellich_lab.constants import DimensionConfig, half_space_hardy_constant, sphere_moment
from rellich_lab.errors import DegenerateProfileError, DomainError, SupportLossError, TruncationError
from rellich_lab.profiles import (
    RadialProfile,
    commensurate_shift,
    conformal_rescale,
    energies,
    half_mass_radius,
    hardy_ratio,
    rayleigh_quotient,
)
from rellich_lab.radial import GridFunction, LogGrid, integrate_weighted

GRID = LogGrid(-16, 16, 1600)


def random_scaled(rng, grid=GRID, terms=6):
    c = rng.normal(size=terms)
    mu = rng.uniform(-3, 3, terms)
    sig = rng.uniform(0.3, 2, terms)
    return sum(ci * np.exp(-(((grid.t - m) / s) ** 2)) for ci, m, s in zip(c, mu, sig))


def bump_profile(N, grid=GRID, centre=0.0):
    return RadialProfile.from_scaled(grid, np.exp(-((grid.t - centre) ** 2)), N)


def test_profile_rejects_small_dimension():
    with pytest.raises(DomainError):
        bump_profile(4)


def test_dimension_mismatch():
    with pytest.raises(DomainError):
        energies(bump_profile(8), DimensionConfig(9))


def test_critical_power_on_annulus():
    eps = 1e-3
    grid = LogGrid(math.log(eps), math.log(1 / eps), 2001)
    for N in (5, 8, 9):
        p = RadialProfile.from_function(grid, lambda r: r ** (-(N - 2) / 2), N)
        with pytest.raises(TruncationError):
            energies(p, DimensionConfig(N))
        e = energies(p, DimensionConfig(N), acknowledge_truncation=True)
        w2 = sphere_moment(N, 2)
        assert e.hardy == pytest.approx(2 * w2 * math.log(1 / eps), rel=1e-12)
        # exact in the continuum; what remains is the fourth-order stencil error
        assert e.bending / e.hardy == pytest.approx(half_space_hardy_constant(N), rel=1e-7)


def test_bubble_power_matches_beta_integral():
    N = 9
    # the integrand falls off only like 1/r, so the grid reaches far out
    f = LogGrid(-20, 60, 8001).sample(lambda r: (1 + r * r) ** (-(N - 4) / 2))
    squared = f.with_values(f.values**2)
    assert integrate_weighted(squared, N - 1) == pytest.approx(float(beta_half(4.5, 0.5)), rel=1e-10)


def test_energies_are_nonnegative_and_sign_blind():
    p = RadialProfile.from_scaled(GRID, random_scaled(np.random.default_rng(1)), 8)
    neg = RadialProfile(p.f.with_values(-p.values), 8)
    cfg = DimensionConfig(8, 1.5, 50.0)
    a, b = energies(p, cfg), energies(neg, cfg)
    assert min(a.bending, a.hardy, a.sobolev_s, a.sobolev_0) > 0
    assert a == b


def test_quotient_decreases_in_gamma():
    p = bump_profile(8)
    q = [rayleigh_quotient(p, DimensionConfig(8, 1.0, g)) for g in (-20.0, 0.0, 100.0)]
    assert q[0] > q[1] > q[2]


def test_quotient_of_zero_profile_is_degenerate():
    p = RadialProfile(GridFunction(GRID, np.zeros(GRID.n_points)), 8)
    with pytest.raises(DegenerateProfileError):
        rayleigh_quotient(p, DimensionConfig(8))
    with pytest.raises(DegenerateProfileError):
        hardy_ratio(p)
    with pytest.raises(DegenerateProfileError):
        half_mass_radius(p, DimensionConfig(8))


def test_quotient_uses_supplied_breakdown():
    p = bump_profile(8)
    cfg = DimensionConfig(8, 2.0, 30.0)
    e = energies(p, cfg)
    assert rayleigh_quotient(p, cfg, breakdown=e) == rayleigh_quotient(p, cfg)
    assert e.quadratic_form(30.0) == e.bending - 30.0 * e.hardy


@pytest.mark.parametrize("N", [5, 8, 11])
def test_coercivity_and_hardy_bound_on_random_profiles(N):
    rng = np.random.default_rng(N)
    gamma_h = half_space_hardy_constant(N)
    for _ in range(200):
        p = RadialProfile.from_scaled(GRID, random_scaled(rng), N)
        e = energies(p, DimensionConfig(N))
        assert e.quadratic_form(0.99 * gamma_h) > 0
        assert e.bending / e.hardy >= gamma_h * (1 - 1e-3)


def test_rescale_identity_and_single_node():
    p = RadialProfile.from_scaled(GRID, random_scaled(np.random.default_rng(2)), 8)
    assert conformal_rescale(p, 1.0) is p
    cfg = DimensionConfig(8, 1.0)
    e0 = energies(p, cfg)
    e1 = energies(conformal_rescale(p, math.exp(GRID.h)), cfg)
    for a, b in zip(vars(e0).values(), vars(e1).values()):
        assert b == pytest.approx(a, rel=1e-12)


def test_rescale_group_property():
    p = RadialProfile.from_scaled(GRID, random_scaled(np.random.default_rng(3)), 9)
    step = math.exp(GRID.h)
    q = p
    for _ in range(7):
        q = conformal_rescale(q, step)
    direct = conformal_rescale(p, math.exp(7 * GRID.h))
    assert np.allclose(q.values, direct.values, rtol=1e-13, atol=0)


@settings(max_examples=30, deadline=None)
@given(k=st.integers(-120, 120), seed=st.integers(0, 2**16), s=st.sampled_from([0.0, 1.0, 2.5]))
def test_quotient_is_dilation_invariant(k, seed, s):
    p = RadialProfile.from_scaled(GRID, random_scaled(np.random.default_rng(seed)), 8)
    cfg = DimensionConfig(8, s, 60.0)
    q0 = rayleigh_quotient(p, cfg)
    q1 = rayleigh_quotient(conformal_rescale(p, math.exp(k * GRID.h)), cfg)
    assert q1 == pytest.approx(q0, rel=1e-12)


def test_rescale_warns_on_incommensurate_scale():
    p = bump_profile(8)
    k, used = commensurate_shift(GRID, 1.5)
    assert k == round(math.log(1.5) / GRID.h)
    with pytest.warns(UserWarning, match="not grid-commensurate"):
        q = conformal_rescale(p, 1.5)
    assert np.allclose(q.values, conformal_rescale(p, used).values)


def test_rescale_reports_support_loss():
    p = bump_profile(8)
    with pytest.raises(SupportLossError):
        conformal_rescale(p, math.exp(700 * GRID.h))
    with pytest.raises(SupportLossError):
        conformal_rescale(p, math.exp(2000 * GRID.h))
    with pytest.raises(DomainError):
        commensurate_shift(GRID, -1.0)


def test_half_mass_radius_of_symmetric_profile():
    for s in (0.0, 1.0, 3.0):
        cfg = DimensionConfig(8, s)
        assert half_mass_radius(bump_profile(8), cfg) == pytest.approx(1.0, abs=GRID.h)


def test_half_mass_radius_brackets_support():
    grid = LogGrid(-3, 3, 1201)
    f = grid.sample(lambda r: np.where((r > 2) & (r < 4), np.sin(np.pi * (r - 2) / 2) ** 4, 0.0))
    rho = half_mass_radius(RadialProfile(f, 8), DimensionConfig(8, 1.0))
    assert 2 < rho < 4


def test_normalising_by_half_mass_radius():
    cfg = DimensionConfig(9, 2.0)
    p = bump_profile(9, centre=2.3)
    rho = half_mass_radius(p, cfg)
    assert rho == pytest.approx(math.exp(2.3), rel=3 * GRID.h)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        q = conformal_rescale(p, rho)
    assert abs(math.log(half_mass_radius(q, cfg))) <= GRID.h
