"""Spectrum model: transfer coefficient, exponents, classification."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from lrkinetic import spectrum as sp


def test_theta_and_sigma_amp_are_derived(model):
    assert model.theta == pytest.approx(0.5, abs=1e-15)
    assert model.sigma_amp == 1.0
    j = sp.jump_measure(model, delta=0.01)
    assert j.theta == model.theta
    assert j.delta == 0.01


def test_parameter_validation():
    with pytest.raises(sp.ModelValidationError, match="alpha"):
        sp.SpectrumModel(alpha=0.4)
    with pytest.raises(sp.ModelValidationError, match="beta"):
        sp.SpectrumModel(beta=0.7)
    with pytest.raises(sp.ModelValidationError):
        sp.SpectrumModel(alpha=0.55, beta=0.3)  # alpha+beta < 1
    with pytest.raises(sp.ModelValidationError):
        sp.SpectrumModel(alpha=0.99, beta=0.52)


def test_sigma_normalization_point():
    # at a point where r0hat = pi and gap = 1, sigma must equal 2pi/(2pi) = 1
    m = sp.SpectrumModel(p_max=2.0, bump_profile=lambda r: math.pi * r**0.5)
    assert sp.gap(m, 1.0) == pytest.approx(1.0)
    assert sp.r0hat(m, 1.0) == pytest.approx(math.pi)
    assert sp.eval_sigma(m, 1.0) == pytest.approx(1.0, rel=1e-14)


def test_sigma_compact_support_and_singularity(model):
    assert sp.eval_sigma(model, 1.0) == 0.0
    assert sp.eval_sigma(model, 1.7) == 0.0
    with pytest.raises(sp.SingularityError):
        sp.eval_sigma(model, 0.0)


def test_sigma_small_p_asymptote(model):
    # on the plateau the profile is exactly a0, so the normalized ratio is 1
    for r in (1e-2, 1e-3, 1e-4):
        ratio = sp.eval_sigma(model, r) * (2 * math.pi) * r**1.5 / 2.0
        assert ratio == pytest.approx(model.a0, rel=1e-12)


def test_sigma_even(model, rng):
    pts = rng.uniform(0.01, 0.99, size=20)
    assert np.allclose(sp.eval_sigma(model, pts), sp.eval_sigma(model, -pts), rtol=0, atol=0)


def test_power_spectrum_zero_frequency_matches_sigma(model, rng):
    pts = rng.uniform(0.01, 0.99, size=10)
    lhs = sp.eval_power_spectrum(model, 0.0, pts)
    rhs = (2 * math.pi) ** model.dimension * np.asarray(sp.eval_sigma(model, pts))
    assert np.allclose(lhs, rhs, rtol=1e-14)


def test_power_spectrum_decreasing_in_omega(model):
    p = 0.3
    vals = [sp.eval_power_spectrum(model, w, p) for w in (0.0, 0.5, 1.0, 3.0, 10.0)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_power_spectrum_lorentzian_normalization(model):
    # integrating the Lorentzian over omega / 2pi must return r0hat(p)
    p = 0.4
    target = float(sp.r0hat(model, p))
    val, _ = integrate.quad(
        lambda w: sp.eval_power_spectrum(model, w, p), -np.inf, np.inf, epsrel=1e-10
    )
    assert val / (2 * math.pi) == pytest.approx(target, rel=1e-6)


def test_time_corr_basics(model):
    p = 0.25
    r0 = float(sp.r0hat(model, p))
    assert sp.eval_time_corr(model, 0.0, p) == pytest.approx(r0)
    # exponential semigroup: C(t)*C(s) = C(t+s)*C(0)
    c = lambda t: float(sp.eval_time_corr(model, t, p))
    assert c(0.7) * c(1.1) == pytest.approx(c(1.8) * r0, rel=1e-12)


def test_time_corr_integral(model):
    p = 0.35
    val, _ = integrate.quad(lambda t: sp.eval_time_corr(model, t, p), 0, np.inf, epsrel=1e-10)
    expected = float(sp.r0hat(model, p)) / float(sp.gap(model, p))
    assert val == pytest.approx(expected, rel=1e-8)


def test_classification_default_long_range(model):
    rep = sp.classify_decorrelation(model)
    assert rep.status == "LONG_RANGE"
    assert rep.fitted_exponent == pytest.approx(0.5, abs=0.05)
    assert rep.matches_prediction


def test_classification_steeper_exponent():
    rep = sp.classify_decorrelation(sp.SpectrumModel(alpha=0.9, beta=0.5))
    assert rep.status == "LONG_RANGE"
    assert rep.fitted_exponent == pytest.approx(0.8, abs=0.08)


def test_classification_short_range():
    # a profile vanishing quadratically at 0 makes r0hat/gap bounded
    m = sp.SpectrumModel(bump_profile=lambda r: np.where(r < 1.0, r**2 * (1 - r) ** 2, 0.0))
    assert sp.classify_decorrelation(m).status == "SHORT_RANGE"


def test_regularity_integrals_finite_and_linear(model):
    vals = sp.regularity_integrals(model)
    assert all(v > 0 and np.isfinite(v) for v in vals)
    doubled = sp.regularity_integrals(sp.SpectrumModel(a0=2.0))
    assert doubled[0] == pytest.approx(2 * vals[0], rel=1e-12)


def test_regularity_third_moment_beta_trend():
    # support inside the unit ball: |p|^(3-6b) shrinks pointwise as beta
    # decreases, so the third moment decreases monotonically with it
    thirds = [sp.regularity_integrals(sp.SpectrumModel(beta=b))[2] for b in (0.5, 0.4, 0.3)]
    assert thirds[0] > thirds[1] > thirds[2]
    assert thirds[0] == pytest.approx(3.4588783955, rel=1e-9)


def test_psi_zero_at_origin(jump):
    assert sp.psi(jump, 0.0) == 0.0


@settings(max_examples=25, deadline=None)
@given(q=st.floats(min_value=-60.0, max_value=60.0, allow_nan=False))
def test_psi_even_and_nonpositive(q):
    j = sp.jump_measure(sp.DEFAULT_MODEL)
    v = sp.psi_batch(j, np.array([q, -q]))
    assert v[0] == pytest.approx(v[1], rel=1e-12, abs=1e-15)
    assert v[0] <= 0.0


def test_psi_mesh_refinement_agreement(jump):
    for q in (0.1, 1.0, 10.0, 100.0):
        coarse = sp.psi_batch(jump, np.array([q]), refine=2)[0]
        fine = sp.psi_batch(jump, np.array([q]), refine=4)[0]
        assert abs(fine - coarse) <= 1e-6 * abs(fine)


def test_psi_large_q_growth_rate(jump):
    # -psi/|q|^theta climbs toward the power-law constant; the approach is
    # O(|q|^-theta) because sigma matches the pure power only below p_max/2
    from lrkinetic.fractional import sigma_theta_constant

    frac, _ = sigma_theta_constant(jump)
    vals = {q: -sp.psi(jump, q) / q**jump.theta for q in (1e2, 1e3, 1e4)}
    assert vals[1e2] < vals[1e3] < vals[1e4] < frac.c_theta
    assert vals[1e4] == pytest.approx(frac.c_theta, rel=0.02)


def test_psi_path_integral_cases(jump):
    assert sp.psi_path_integral(jump, 2.0, 1.0, 0.0) == 0.0
    direct = sp.psi_path_integral(jump, 2.0, 0.0, 1.5)
    assert direct == pytest.approx(1.5 * sp.psi(jump, 2.0), rel=1e-9)
    vals = [sp.psi_path_integral(jump, 1.3, -0.8, t) for t in (0.5, 1.0, 2.0)]
    assert all(v <= 0 for v in vals)
    assert vals[0] > vals[1] > vals[2]
    assert all(abs(math.exp(v)) <= 1.0 for v in vals)


def test_psi_table_matches_path_integral(jump, rng):
    tab = sp.psi_table(jump, 64.0)
    for _ in range(12):
        q = rng.uniform(-10, 10)
        y = rng.uniform(-8, 8)
        t = rng.uniform(0.1, 2.0)
        direct = sp.psi_path_integral(jump, q, y, t)
        fast = float(tab.damping_exponent(np.array(q), np.array(y), t))
        assert fast == pytest.approx(direct, rel=1e-7, abs=1e-10)


def test_truncated_rate_behavior(jump):
    from lrkinetic.montecarlo import total_rate

    assert total_rate(jump, 1.0) == 0.0
    assert total_rate(jump, 1.2) == 0.0
    rates = {d: total_rate(jump, d) for d in (0.1, 0.05, 0.01, 1e-3, 1e-4)}
    vals = list(rates.values())
    assert all(b > a for a, b in zip(vals, vals[1:]))
    # scaled rate approaches a positive constant from below
    scaled = [rates[d] * d**jump.theta for d in (0.01, 1e-3, 1e-4)]
    assert scaled[0] < scaled[1] < scaled[2]
    # the pure power law dominates only below the plateau edge
    small = (0.01, 1e-3, 1e-4)
    slope = np.polyfit(np.log(small), np.log([rates[d] for d in small]), 1)[0]
    assert slope == pytest.approx(-jump.theta, rel=0.1)


def test_measure_integral_second_moment(jump):
    # int |p|^2 sigma(p) dp over delta < |p| < p_max against a scipy oracle
    got = sp.measure_integral(sp.truncated(jump, 0.05), lambda p: p[:, 0] ** 2, refine=4, order=16)
    oracle, _ = integrate.quad(
        lambda r: 2 * float(sp.eval_sigma(jump.model, r)) * r**2, 0.05, 1.0, epsrel=1e-11, limit=200
    )
    assert got == pytest.approx(oracle, rel=1e-9)


def test_total_rate_against_scipy_oracle(jump):
    from lrkinetic.montecarlo import total_rate

    oracle, _ = integrate.quad(
        lambda r: 2 * float(sp.eval_sigma(jump.model, r)), 0.05, 1.0, epsrel=1e-12, limit=200
    )
    assert total_rate(jump, 0.05) == pytest.approx(oracle, rel=1e-8)
