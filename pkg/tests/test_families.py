import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import beta_half, bilaplacian_of_bubble, laplacian_of_bubble_symbolic
from rellich_lab.constants import sphere_area, sphere_moment
from rellich_lab.errors import DomainError, FitRejected
from rellich_lab.radial import LogGrid, radial_laplacian
from rellich_lab.testfuncs import (
    DEFAULT_EPS_LADDER,
    BubbleSpec,
    CutoffSpec,
    axisymmetric_integral,
    bubble_constants,
    bubble_energies,
    bubble_radial,
    classify_regime,
    extrapolated_ratio,
    fit_asymptotics,
    hardy_coefficient_candidates,
    hardy_sequence,
    hardy_sequence_table,
    log_slopes,
    resolve_hardy_coefficient,
    sobolev_constant_closed_form,
    sobolev_ratio_of_bubble,
    spherical_mean_inverse_fourth,
    strict_upper_bound_scan,
)

# ------------------------------------------------------------------ cutoffs


@pytest.mark.parametrize("shape", ["quintic", "septic"])
def test_cutoff_properties(shape):
    cut = CutoffSpec(shape, shape)
    x = np.linspace(0, 3, 3001)
    phi, psi = cut.inner(x), cut.outer(x)
    assert cut.inner(0.0) == 0.0
    assert np.all(phi[x >= 1] == 1.0)
    assert np.all(phi[x < 1] <= 10 * x[x < 1])
    assert np.all(psi[x <= 1] == 1.0)
    assert np.all(psi[x >= 2] == 0.0)
    assert np.all((0 <= phi) & (phi <= 1) & (0 <= psi) & (psi <= 1))


@pytest.mark.parametrize("shape", ["quintic", "septic"])
def test_outer_cutoff_derivatives_are_continuous(shape):
    cut = CutoffSpec(outer_shape=shape)
    for knot in (1.0, 2.0):
        left = cut.outer_derivs(np.array([knot - 1e-9]))
        right = cut.outer_derivs(np.array([knot + 1e-9]))
        for a, b in zip(left, right):
            assert a == pytest.approx(b, abs=1e-6)


def test_outer_derivatives_match_differences():
    cut = CutoffSpec()
    x = np.linspace(1.05, 1.95, 7)
    h = 1e-5
    psi, d1, d2 = cut.outer_derivs(x)
    assert np.allclose(d1, (cut.outer(x + h) - cut.outer(x - h)) / (2 * h), atol=1e-8)
    assert np.allclose(d2, (cut.outer(x + h) - 2 * psi + cut.outer(x - h)) / h**2, atol=1e-4)


def test_cutoff_validation():
    with pytest.raises(DomainError):
        CutoffSpec("cubic")
    with pytest.raises(DomainError):
        CutoffSpec(inner_width=0.0)


# ---------------------------------------------------------- Hardy sequence


def test_hardy_sequence_validation():
    with pytest.raises(DomainError):
        hardy_sequence(8, 0.2)
    with pytest.raises(DomainError):
        hardy_sequence(8, 1e-3, grid=LogGrid(-5, 5, 1001))


def test_hardy_sequence_profile_shape():
    eps = 1e-3
    p = hardy_sequence(8, eps)
    r = p.grid.r
    mid = (r > 1.5 * eps) & (r < 0.5 / eps)
    assert np.allclose(p.values[mid], r[mid] ** -3.0, rtol=1e-14)
    assert np.all(p.values[r > 2 / eps] == 0.0)


def test_hardy_sequence_slopes_and_ratio():
    rows = hardy_sequence_table(8, [1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
    slope_b, slope_h = log_slopes(rows)
    w2 = sphere_moment(8, 2)
    assert slope_b == pytest.approx(2 * w2 * 225, rel=1e-2)
    assert slope_h == pytest.approx(2 * w2, rel=1e-2)
    ratios = [row.ratio for row in rows]
    assert all(a > b > 225 for a, b in zip(ratios, ratios[1:]))
    assert extrapolated_ratio(rows[3], rows[4]) == pytest.approx(225, rel=2e-2)
    with pytest.raises(DomainError):
        extrapolated_ratio(rows[0], rows[0])


def test_hardy_sequence_hardy_term_is_logarithmic():
    N = 9
    w2 = sphere_moment(N, 2)
    rows = hardy_sequence_table(N, [1e-3, 1e-4])
    # hardy(eps) - 2 w(2) ln(1/eps) is O(1): the same constant at both eps
    offsets = [row.hardy - 2 * w2 * row.log_inv_eps for row in rows]
    assert offsets[0] == pytest.approx(offsets[1], abs=1e-8 * rows[1].hardy)


# ------------------------------------------------------------------ bubble


@pytest.mark.parametrize("N", [5, 8, 9, 12])
def test_bubble_values_at_origin(N):
    U = bubble_radial(N)
    assert U.value(0.0) == 1.0
    assert U.d1(0.0) == 0.0
    assert U.laplacian(0.0) == -N * (N - 4)
    # series oracle: U = 1 - (N-4)/2 r^2 + ..., so Delta U(0) = N * 2 * (-(N-4)/2)
    r, lap = laplacian_of_bubble_symbolic(N)
    assert float(lap.subs(r, 0)) == -N * (N - 4)


@pytest.mark.parametrize("N", [5, 8, 9])
def test_closed_form_derivatives(N):
    U = bubble_radial(N)
    r, lap = laplacian_of_bubble_symbolic(N)
    for x in (0.1, 0.7, 2.5):
        assert U.laplacian(x) == pytest.approx(float(lap.subs(r, x)), rel=1e-13)
        assert U.laplacian(x) == pytest.approx(U.d2(x) + (N - 1) * U.d1(x) / x, rel=1e-13)
        h = 1e-5
        assert U.laplacian_d1(x) == pytest.approx((U.laplacian(x + h) - U.laplacian(x - h)) / (2 * h), rel=1e-7)


def test_closed_form_laplacian_matches_discrete():
    N = 9
    U = bubble_radial(N)
    grid = LogGrid(-4, 3, 4001)
    discrete = radial_laplacian(U.profile(grid), N).values
    # same radii as the bilaplacian check; below r ~ 0.1 roundoff amplified by r^-2 dominates
    inner = (grid.r >= 0.2) & (grid.r <= 3.0)
    assert np.max(np.abs(discrete[inner] / U.laplacian(grid.r[inner]) - 1)) <= 1e-8


@pytest.mark.parametrize("N, n", [(5, 4001), (8, 4001), (9, 4001), (12, 8001)])
def test_bilaplacian_is_power_of_bubble(N, n):
    U = bubble_radial(N)
    grid = LogGrid(-4, 3, n)
    second = radial_laplacian(grid.sample(U.laplacian), N).values
    idx = np.searchsorted(grid.t, np.linspace(math.log(0.2), math.log(3.0), 50))
    ratio = second[idx] / U.value(grid.r[idx]) ** ((N + 4) / (N - 4))
    assert np.ptp(ratio) / np.mean(ratio) <= 1e-8
    symbolic = float(bilaplacian_of_bubble(N))
    assert np.mean(ratio) == pytest.approx(symbolic, rel=1e-8)
    assert U.bilaplacian_constant() == symbolic


def test_bilaplacian_constant_symbolic_examples():
    assert bilaplacian_of_bubble(8) == 1920
    assert bilaplacian_of_bubble(9) == 3465


def test_bubble_mass_integrals_match_beta():
    # int_0^inf r^7 (1+r^2)^-8 dr = B(4,4)/2 = 1/280
    c8 = bubble_constants(8)
    assert c8.sobolev_0 == pytest.approx(sphere_area(8) * float(beta_half(4, 4)), rel=1e-13)
    assert float(beta_half(4, 4)) == pytest.approx(1 / 280, rel=1e-14)
    full = hardy_coefficient_candidates(9)["full"]
    assert full == pytest.approx(sphere_area(9) * float(beta_half(4.5, 0.5)), rel=1e-13)
    assert full == pytest.approx(12.751, abs=5e-4)


@pytest.mark.parametrize("N", [5, 6, 8, 9, 12])
def test_sobolev_constant_matches_closed_form(N):
    assert bubble_constants(N).sobolev_constant == pytest.approx(sobolev_constant_closed_form(N), rel=1e-13)


@settings(max_examples=25, deadline=None)
@given(N=st.integers(5, 14), scale=st.floats(0.05, 20.0))
def test_sobolev_ratio_is_scale_invariant(N, scale):
    assert sobolev_ratio_of_bubble(N, scale) == pytest.approx(sobolev_ratio_of_bubble(N), rel=1e-10)


def test_sobolev_ratio_rejects_bad_input():
    with pytest.raises(DomainError):
        sobolev_ratio_of_bubble(4)
    with pytest.raises(DomainError):
        sobolev_ratio_of_bubble(8, 0.0)


def test_bubble_spec_validation():
    with pytest.raises(DomainError):
        BubbleSpec(9, 1e-3, a=1.0, delta=0.5)
    with pytest.raises(DomainError):
        BubbleSpec(9, 0.0)
    with pytest.raises(DomainError):
        BubbleSpec(4, 1e-3)
    spec = BubbleSpec(9, 1e-3)
    assert spec.blowup_radius == pytest.approx(250)
    assert spec.truncation_estimate() == pytest.approx(4e-3**5)


def test_wide_bubble_warns():
    with pytest.warns(UserWarning, match="not small against delta"):
        bubble_energies(BubbleSpec(9, 0.05))


def test_spherical_mean_against_direct_average():
    # in N = 3 the mean of |a e1 + rho sigma|^-4 has the closed form 1/(a^2 - rho^2)^2
    for rho in (0.1, 0.3, 0.45):
        assert spherical_mean_inverse_fourth(3, 1.0, rho) == pytest.approx(1 / (1 - rho**2) ** 2, rel=1e-13)
    assert spherical_mean_inverse_fourth(9, 2.0, 0.0) == pytest.approx(1 / 16, rel=1e-14)


def test_bubble_terms_against_tensor_grid():
    spec = BubbleSpec(9, 1e-2)
    terms = bubble_energies(spec)
    assert axisymmetric_integral(spec, "hardy", n=2048) == pytest.approx(terms.hardy, rel=1e-6)
    assert axisymmetric_integral(spec, "sobolev", n=2048) == pytest.approx(terms.sobolev_0, rel=1e-6)


def test_half_space_restriction_is_invisible_to_the_ball():
    spec = BubbleSpec(9, 1e-2)
    half = axisymmetric_integral(spec, "sobolev", n=1024)
    full = axisymmetric_integral(spec, "sobolev", n=1024, half_space=False)
    assert half == pytest.approx(full, rel=1e-13)
    with pytest.raises(DomainError):
        axisymmetric_integral(spec, "hardy", half_space=False)
    with pytest.raises(DomainError):
        axisymmetric_integral(spec, "energy")


def test_bubble_energy_corrections_scale():
    N = 9
    full = bubble_constants(N)
    a, b = (bubble_energies(BubbleSpec(N, eps), full=full) for eps in (1e-3, 1e-4))
    # bending = int |Delta U|^2 + O(eps^(N-4)); sobolev = int U^p + O(eps^N)
    assert a.d_bending / b.d_bending == pytest.approx(10.0 ** (N - 4), rel=1e-4)
    assert a.d_sobolev / b.d_sobolev == pytest.approx(10.0**N, rel=1e-4)
    e = b.breakdown()
    assert e.sobolev_s == e.sobolev_0 == b.sobolev_0


# ------------------------------------------------------- asymptotic fits


def test_fit_exact_eps4():
    pts = [(e, 7 * e**4) for e in DEFAULT_EPS_LADDER]
    fit = fit_asymptotics(pts, 9)
    assert fit.model == "c*eps^4"
    assert fit.coefficient == pytest.approx(7, rel=1e-10)
    assert fit.residual < 1e-12
    assert fit.as_dict()["regime"] == "eps4"


def test_fit_log_model_on_synthetic_ladder():
    eps = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5]
    pts = [(e, 3 * e**4 * math.log(1 / e) + 0.5 * e**4) for e in eps]
    fit = fit_asymptotics(pts, 8)
    assert fit.regime == fit.detected_regime == "eps4_log"
    assert fit.coefficient == pytest.approx(3, rel=5e-2)


# eps^(N-4) is not a separate regime once N >= 8
CLASSIFY_CASES = [(N, r) for N in range(5, 13) for r in ("eps4", "eps4_log", "eps_N_minus_4") if N < 8 or r != "eps_N_minus_4"]


@pytest.mark.parametrize("N, regime", CLASSIFY_CASES)
def test_classification_on_synthetic_data(N, regime):
    eps = np.array(DEFAULT_EPS_LADDER)
    L = np.log(1 / eps)
    lead = {"eps4": eps**4, "eps4_log": eps**4 * L, "eps_N_minus_4": eps ** (N - 4.0)}[regime]
    values = 2.5 * lead * (1 + 0.01 * np.sin(np.arange(len(eps))))
    assert classify_regime(zip(eps, values), N) == regime


def test_fit_rejects_bad_model():
    pts = [(e, e**2) for e in DEFAULT_EPS_LADDER]
    with pytest.raises(FitRejected) as info:
        fit_asymptotics(pts, 9, tol=1e-3)
    assert len(info.value.residuals) == 5
    assert info.value.fit.residual > 1e-3


def test_fit_ladder_validation():
    with pytest.raises(DomainError):
        fit_asymptotics([(1e-2, 1.0), (1e-3, 1.0), (1e-4, 1.0)], 9)
    with pytest.raises(DomainError):
        fit_asymptotics([(1e-2, 1.0), (8e-3, 1.0), (1e-3, 1.0), (1e-4, 1.0)], 9)
    with pytest.raises(DomainError):
        fit_asymptotics([(e, e**4) for e in DEFAULT_EPS_LADDER], 9, regime="eps_N_minus_4")


def hardy_points(N):
    full = bubble_constants(N)
    return [(e, bubble_energies(BubbleSpec(N, e), full=full).hardy) for e in DEFAULT_EPS_LADDER]


def test_bubble_hardy_fit_n8():
    fit = fit_asymptotics(hardy_points(8), 8)
    assert fit.model == "c*eps^4*ln(1/eps)"
    assert fit.detected_regime == "eps4_log"
    assert fit.coefficient == pytest.approx(math.pi**4 / 3, rel=5e-2)


def test_bubble_hardy_fit_n9_resolves_factor_one():
    fit = fit_asymptotics(hardy_points(9), 9)
    assert fit.model == "c*eps^4"
    res = resolve_hardy_coefficient(fit, 9)
    assert res["resolved_factor"] == 1.0
    assert res["relative_error_full"] < 1e-3
    assert res["relative_error_half"] > 0.9


def test_bubble_hardy_regime_n5():
    assert classify_regime(hardy_points(5), 5) == "eps_N_minus_4"


def test_hardy_candidates_need_n9():
    with pytest.raises(DomainError):
        hardy_coefficient_candidates(8)


# ------------------------------------------------------ strict inequality


def test_strict_scan_positive_gamma_n9():
    scan = strict_upper_bound_scan(9, 100.0)
    assert scan.below_sobolev()
    assert scan.best.gap < 0
    # I - S_N ~ -gamma c eps^4 with c > 0, here c -> int U^2 / S_inf^(2/p)
    last = scan.rows[-1]
    c = -last.gap / (100.0 * last.epsilon**4)
    full = bubble_constants(9)
    assert c == pytest.approx(hardy_coefficient_candidates(9)["full"] / full.sobolev_0 ** (2 / 3.6), rel=5e-2)
    assert scan.sobolev_constant == pytest.approx(sobolev_constant_closed_form(9), rel=1e-13)


def test_strict_scan_zero_gamma_tends_to_sobolev():
    scan = strict_upper_bound_scan(9, 0.0)
    gaps = [row.gap for row in scan.rows]
    assert all(g > 0 for g in gaps)
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-12 * scan.sobolev_constant


def test_strict_scan_negative_gamma_stays_above():
    scan = strict_upper_bound_scan(9, -50.0)
    assert scan.all_above()
    assert all(row.gap > 0 for row in scan.rows)
    assert not scan.below_sobolev()


def test_strict_scan_n8_needs_tiny_eps():
    shallow = strict_upper_bound_scan(8, 100.0)
    assert not shallow.below_sobolev()
    deep = strict_upper_bound_scan(8, 100.0, (1e-19, 1e-22, 1e-24))
    assert deep.below_sobolev()


def test_strict_scan_rejects_supercritical_gamma():
    with pytest.raises(DomainError):
        strict_upper_bound_scan(9, 400.0)


def test_gap_matches_direct_quotient_when_resolvable():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        scan = strict_upper_bound_scan(9, 100.0, (5e-2, 2e-2, 1e-2, 5e-3))
    for row in scan.rows:
        direct = (row.bending - 100.0 * row.hardy) / row.sobolev_0 ** (2 / (2 * 9 / 5))
        assert direct - scan.sobolev_constant == pytest.approx(row.gap, rel=1e-6)
