"""Phase-regime scaling exponents and the variance constant."""

import math

import pytest
from scipy.special import gamma as gamma_fn

from lrkinetic import phase


def test_default_exponents():
    s = phase.compute_scaling(0.75, 0.5, 0.5, 1.0, 1.0, 1)
    assert s.kappa0 == pytest.approx(0.75, abs=1e-15)
    assert s.kappa_gamma == pytest.approx(1.0, abs=1e-14)
    assert s.omega_d == pytest.approx(2.0)


def test_rho_integral_gamma_oracle():
    # alpha=3/4, beta=1/2, nu=1: the integral reduces to Gamma(1/2)
    s = phase.compute_scaling(0.75, 0.5, 0.5, 1.0, 1.0, 1)
    expected = 1.0 * 2.0 / ((2 * math.pi) * 1.0 * 1.0) * math.sqrt(math.pi)
    assert s.diffusion == pytest.approx(expected, rel=1e-8)


def test_general_gamma_closed_form():
    # substitution closed form: Gamma((2-2a)/(2b)) * nu^-((2-2a)/(2b)) / (2b)
    alpha, beta, nu = 0.8, 0.4, 2.0
    s = phase.compute_scaling(alpha, beta, 0.3, 1.5, nu, 1)
    expo = (2 - 2 * alpha) / (2 * beta)
    integral = gamma_fn(expo) * nu ** (-expo) / (2 * beta)
    expected = (
        1.5 * s.omega_d / ((2 * math.pi) * s.kappa_gamma * (2 * s.kappa_gamma - 1)) * integral
    )
    assert s.diffusion == pytest.approx(expected, rel=1e-8)


def test_gamma_to_zero_limit():
    base = phase.compute_scaling(0.75, 0.5, 1e-9, 1.0, 1.0, 1)
    prev = None
    for g in (0.1, 0.01, 0.001):
        s = phase.compute_scaling(0.75, 0.5, g, 1.0, 1.0, 1)
        gap = abs(s.kappa_gamma - base.kappa0)
        if prev is not None:
            assert gap < prev
        prev = gap
    assert prev < 1e-3


def test_kappa_monotone_in_gamma():
    vals = [phase.compute_scaling(0.75, 0.5, g, 1.0, 1.0, 1).kappa_gamma for g in (0.1, 0.3, 0.5, 0.7)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_scale_separation():
    s = phase.compute_scaling(0.75, 0.5, 0.5, 1.0, 1.0, 1)
    assert s.phase_scale_exponent < 1.0


def test_domain_errors():
    with pytest.raises(ValueError, match="gamma"):
        phase.compute_scaling(0.75, 0.5, 1.0, 1.0, 1.0, 1)
    with pytest.raises(ValueError, match="alpha"):
        phase.compute_scaling(0.45, 0.5, 0.5, 1.0, 1.0, 1)
    # note: the accelerated-exponent denominator 1 - gamma*(a+b-1)/b stays
    # positive for every admissible (a, b, gamma) since b/(a+b-1) > 1; the
    # guard in compute_scaling is defensive only


def test_exponents_exceed_half():
    for a, b, g in ((0.6, 0.45, 0.2), (0.9, 0.15, 0.8), (0.75, 0.5, 0.95)):
        s = phase.compute_scaling(a, b, g, 1.0, 1.0, 1)
        assert s.kappa0 > 0.5
        assert s.kappa_gamma > s.kappa0
