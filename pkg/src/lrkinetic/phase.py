"""Scaling exponents and variance constant of the phase-modulation regime.

The wave's random phase develops on the scale eps**(-1/(2*kappa_gamma)),
strictly shorter than the eps**-1 scale of the energy transport; only the
constants are computed here (sampling the limiting fractional-Brownian
modulation is out of scope).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate


@dataclass(frozen=True)
class PhaseScaling:
    kappa0: float
    kappa_gamma: float
    diffusion: float       # variance constant D of the limiting phase
    omega_d: float         # unit-sphere surface area

    def __post_init__(self):
        if self.kappa0 <= 0.5 or self.kappa_gamma <= 0.5:
            raise ValueError("kappa exponents must exceed 1/2")
        if self.diffusion <= 0.0:
            raise ValueError("the variance constant must be positive")

    @property
    def phase_scale_exponent(self) -> float:
        """The phase evolves on eps**(-value); value < 1 means earlier than transport."""
        return 1.0 / (2.0 * self.kappa_gamma)


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d (equals 2 for d = 1)."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def compute_scaling(
    alpha: float, beta: float, gamma: float, a0: float, nu: float, d: int = 1
) -> PhaseScaling:
    """Exponents kappa_0, kappa_gamma and the constant D by adaptive quadrature.

        kappa_0 = (alpha + 2*beta - 1) / (2*beta)
        kappa_gamma = kappa_0 / (1 - gamma*(alpha + beta - 1)/beta)
        D = a0 * Omega_d / ((2*pi)^d * kappa_gamma * (2*kappa_gamma - 1))
            * int_0^inf exp(-nu * rho^(2*beta)) * rho^(1 - 2*alpha) drho

    The integrand has an integrable endpoint singularity (alpha < 1); the
    quadrature targets 1e-8 relative and the closed Gamma-function form of
    the integral is the natural test oracle.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in the open interval (0, 1)")
    if not 0.5 < alpha < 1.0 or not 0.0 < beta <= 0.5:
        raise ValueError("require alpha in (1/2, 1) and beta in (0, 1/2]")
    if a0 <= 0.0 or nu <= 0.0:
        raise ValueError("a0 and nu must be positive")
    kappa0 = (alpha + 2.0 * beta - 1.0) / (2.0 * beta)
    denom = 1.0 - gamma * (alpha + beta - 1.0) / beta
    if denom <= 0.0:
        raise ValueError(
            f"gamma={gamma} too large for alpha={alpha}, beta={beta}: "
            "the accelerated exponent diverges"
        )
    kappa_gamma = kappa0 / denom
    omega = sphere_area(d)
    # substitute u = rho^(2*beta): the integrand becomes exponentially
    # decaying with an integrable algebraic endpoint, which the adaptive
    # rule resolves cleanly even for small beta
    expo = (2.0 - 2.0 * alpha) / (2.0 * beta) - 1.0
    rho_integral, err = integrate.quad(
        lambda u: math.exp(-nu * u) * u**expo / (2.0 * beta),
        0.0,
        math.inf,
        epsabs=0.0,
        epsrel=1e-10,
        limit=500,
    )
    if err > 1e-8 * abs(rho_integral):
        raise RuntimeError("the rho-integral did not reach 1e-8 relative accuracy")
    diffusion = (
        a0 * omega / ((2.0 * math.pi) ** d * kappa_gamma * (2.0 * kappa_gamma - 1.0)) * rho_integral
    )
    return PhaseScaling(kappa0, kappa_gamma, diffusion, omega)
