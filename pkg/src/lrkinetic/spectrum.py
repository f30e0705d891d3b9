"""Random-medium statistics: spectral density, transfer coefficient, exponents.

The medium is a stationary Gaussian potential whose spatial power spectrum
``r0hat(p) = a(|p|) / |p|**(d + 2*alpha - 2)`` is compactly supported with an
integrable singularity at p = 0, and whose per-mode temporal decorrelation
rate is ``gap(p) = nu * |p|**(2*beta)``.  Everything downstream (the jump
measure of the transport equation, its characteristic exponent, the
fractional limit) is driven by the transfer coefficient

    sigma(p) = 2 * r0hat(p) / ((2*pi)**d * gap(p)),

which diverges like |p|**-(d + theta) at the origin with
theta = 2*(alpha + beta - 1) in (0, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate


class SingularityError(ValueError):
    """Evaluation at p = 0, where the spectrum is not defined pointwise."""


class ModelValidationError(ValueError):
    """Model parameters or derived integrals violate a required constraint."""


def smooth_plateau(a0: float, p_max: float) -> Callable[[np.ndarray], np.ndarray]:
    """C-infinity bump profile: equals a0 on [0, p_max/2], decays to 0 at p_max.

    Uses the standard smooth partition function f(s) = exp(-1/s), so every
    derivative vanishes at both junctions.
    """

    def profile(r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        # u goes 1 -> 0 across the transition band [p_max/2, p_max]
        u = np.clip((p_max - r) / (p_max / 2.0), 0.0, 1.0)
        with np.errstate(divide="ignore", over="ignore"):
            fu = np.where(u > 0.0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
            fv = np.where(u < 1.0, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
        return a0 * fu / (fu + fv)

    return profile


@dataclass(frozen=True)
class SpectrumModel:
    """Parameters of the random-medium statistics. Immutable after creation.

    ``bump_profile`` is the radial amplitude a(r); the default is the smooth
    plateau above.  ``anisotropy`` optionally modulates the amplitude by an
    even function of the direction with values in (0, 1]; all defaults are
    isotropic.
    """

    dimension: int = 1
    a0: float = 1.0
    alpha: float = 0.75
    beta: float = 0.5
    nu: float = 1.0
    p_max: float = 1.0
    bump_profile: Callable[[np.ndarray], np.ndarray] | None = None
    anisotropy: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        problems = []
        if self.dimension < 1 or int(self.dimension) != self.dimension:
            problems.append("dimension must be a positive integer")
        if not 0.5 < self.alpha < 1.0:
            problems.append(f"alpha={self.alpha} outside the open interval (1/2, 1)")
        if not 0.0 < self.beta <= 0.5:
            problems.append(f"beta={self.beta} outside (0, 1/2]")
        if self.nu <= 0.0:
            problems.append("nu must be positive")
        if self.a0 < 0.0:
            problems.append("a0 must be nonnegative")
        if self.p_max <= 0.0:
            problems.append("p_max must be positive")
        if not 1.0 < self.alpha + self.beta < 1.5:
            problems.append(
                f"alpha+beta={self.alpha + self.beta} must lie in (1, 3/2) "
                "so the jump exponent stays in (0, 1)"
            )
        if problems:
            raise ModelValidationError("; ".join(problems))

    @property
    def theta(self) -> float:
        """Long-range exponent 2*(alpha + beta - 1), derived, never re-entered."""
        return 2.0 * (self.alpha + self.beta - 1.0)

    @property
    def sigma_amp(self) -> float:
        """Small-|p| amplitude of r0hat/gap, i.e. a0/nu."""
        return self.a0 / self.nu

    @property
    def gap_max(self) -> float:
        """Largest decorrelation rate on the spectral support."""
        return self.nu * self.p_max ** (2.0 * self.beta)

    def amplitude(self, r: np.ndarray, u: np.ndarray | None = None) -> np.ndarray:
        """a(r) (times the direction factor when anisotropic)."""
        prof = self.bump_profile or smooth_plateau(self.a0, self.p_max)
        a = prof(np.asarray(r, dtype=float))
        if self.anisotropy is not None and u is not None:
            a = a * self.anisotropy(u)
        return a


def as_points(p, dimension: int) -> np.ndarray:
    """Coerce p to an (n, d) array.  In d=1 any array is read as coordinates."""
    p = np.asarray(p, dtype=float)
    if dimension == 1:
        return p.reshape(-1, 1)
    if p.ndim == 1:
        if p.shape[0] != dimension:
            raise ValueError(f"expected a vector of length {dimension}")
        return p.reshape(1, -1)
    if p.shape[-1] != dimension:
        raise ValueError(f"last axis must have length {dimension}")
    return p.reshape(-1, dimension)


def _check_nonzero(radii: np.ndarray) -> None:
    if np.any(radii == 0.0):
        raise SingularityError("spectrum evaluated at p = 0 (non-integrable singularity)")


def r0hat(model: SpectrumModel, p) -> np.ndarray:
    """Spatial power spectrum a(p) / |p|**(d + 2*alpha - 2), zero off the support."""
    pts = as_points(p, model.dimension)
    r = np.linalg.norm(pts, axis=-1)
    _check_nonzero(r)
    inside = r < model.p_max
    u = pts / r[:, None]
    vals = np.zeros_like(r)
    expo = model.dimension + 2.0 * model.alpha - 2.0
    if np.any(inside):
        vals[inside] = model.amplitude(r[inside], u[inside]) / r[inside] ** expo
    return vals if vals.size > 1 else float(vals[0])


def gap(model: SpectrumModel, p) -> np.ndarray:
    """Spectral gap nu * |p|**(2*beta)."""
    pts = as_points(p, model.dimension)
    r = np.linalg.norm(pts, axis=-1)
    vals = model.nu * r ** (2.0 * model.beta)
    return vals if vals.size > 1 else float(vals[0])


def eval_sigma(model: SpectrumModel, p) -> np.ndarray:
    """Transfer coefficient 2*r0hat(p) / ((2*pi)**d * gap(p)).

    Raises SingularityError at p = 0; returns 0 for |p| >= p_max.
    """
    pts = as_points(p, model.dimension)
    r = np.linalg.norm(pts, axis=-1)
    _check_nonzero(r)
    inside = r < model.p_max
    vals = np.zeros_like(r)
    if np.any(inside):
        sub = pts[inside]
        vals[inside] = (
            2.0
            * np.asarray(r0hat(model, sub), dtype=float)
            / ((2.0 * math.pi) ** model.dimension * np.asarray(gap(model, sub), dtype=float))
        )
    return vals if vals.size > 1 else float(vals[0])


def eval_power_spectrum(model: SpectrumModel, omega: float, p) -> np.ndarray:
    """Lorentzian space-time power spectrum 2*gap*r0hat / (omega^2 + gap^2)."""
    g = np.asarray(gap(model, p), dtype=float)
    r0 = np.asarray(r0hat(model, p), dtype=float)
    vals = 2.0 * g * r0 / (omega**2 + g**2)
    return vals if vals.size > 1 else float(vals)


def eval_time_corr(model: SpectrumModel, t: float, p) -> np.ndarray:
    """Per-mode temporal autocorrelation exp(-gap(p)*|t|) * r0hat(p)."""
    g = np.asarray(gap(model, p), dtype=float)
    r0 = np.asarray(r0hat(model, p), dtype=float)
    vals = np.exp(-g * abs(t)) * r0
    return vals if vals.size > 1 else float(vals)


@dataclass(frozen=True)
class JumpMeasure:
    """The jump measure sigma(p) dp of the momentum process, plus derived constants.

    ``delta`` is the small-jump truncation radius used by Monte Carlo; 0 means
    the full measure, valid only for analytic queries (the total rate is then
    infinite in the long-range case).
    """

    model: SpectrumModel
    theta: float
    sigma_amp: float
    delta: float = 0.0

    def __post_init__(self):
        if self.delta < 0.0:
            raise ModelValidationError("delta must be nonnegative")


def jump_measure(model: SpectrumModel, delta: float = 0.0) -> JumpMeasure:
    """Build the jump measure for ``model``; theta and sigma_amp are derived."""
    return JumpMeasure(model=model, theta=model.theta, sigma_amp=model.sigma_amp, delta=delta)


def truncated(jump: JumpMeasure, delta: float) -> JumpMeasure:
    return replace(jump, delta=delta)


# ---------------------------------------------------------------------------
# Quadrature over the singular jump measure.
#
# The radial mesh is geometrically graded toward the origin (ratio 1/2); the
# integrands are smooth on each shell and singular only at p = 0, so a
# fixed-order Gauss rule per shell converges fast.  Shells are subdivided
# further when the integrand oscillates (large |q| in the characteristic
# exponent), keeping each panel below a fraction of an oscillation period.
# ---------------------------------------------------------------------------

_SHELL_RATIO = 0.5
_N_SHELLS = 60


def _composite_gauss(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    xg, wg = leggauss(order)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


def _shell_edges(r_hi: float, r_lo: float = 0.0, n_shells: int = _N_SHELLS) -> np.ndarray:
    """Geometric shell edges from r_hi down toward r_lo (or toward 0)."""
    edges = [r_hi]
    r = r_hi
    for _ in range(n_shells):
        nxt = r * _SHELL_RATIO
        if r_lo > 0.0 and nxt <= r_lo:
            edges.append(r_lo)
            break
        edges.append(nxt)
        r = nxt
    return np.array(edges[::-1])


def radial_rule(
    r_hi: float,
    r_lo: float = 0.0,
    osc_scale: float = 0.0,
    order: int = 12,
    n_shells: int = _N_SHELLS,
    refine: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss nodes/weights on (r_lo, r_hi) graded toward 0.

    ``osc_scale`` is the largest |q| the integrand will see; each shell is
    split so no panel spans more than ~2.5/osc_scale.  ``refine`` multiplies
    the panel count (used for convergence checks).
    """
    shell_edges = _shell_edges(r_hi, r_lo, n_shells)
    panels = [shell_edges[0]]
    for a, b in zip(shell_edges[:-1], shell_edges[1:]):
        n_sub = max(1, int(math.ceil((b - a) * max(osc_scale, 0.0) / 2.5))) * refine
        panels.extend(np.linspace(a, b, n_sub + 1)[1:])
    return _composite_gauss(np.array(panels), order)


def _angular_rule(dimension: int, n_angles: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Unit directions and surface weights (summing to the sphere area)."""
    if dimension == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if dimension == 2:
        phi = 2.0 * math.pi * (np.arange(n_angles) + 0.5) / n_angles
        u = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        w = np.full(n_angles, 2.0 * math.pi / n_angles)
        return u, w
    raise NotImplementedError("sphere quadrature implemented for d <= 2 only")


def sigma_rule(
    jump: JumpMeasure,
    osc_scale: float = 0.0,
    order: int = 12,
    refine: int = 1,
    n_angles: int = 64,
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes (n, d) and weights such that sum(w_i * f(p_i)) ~ int f(p) sigma(p) dp.

    The weights already include sigma, the radial Jacobian and the angular
    measure; the integration region is {delta < |p| < p_max}.
    """
    model = jump.model
    d = model.dimension
    if d == 2 and osc_scale > 0.0:
        n_angles = max(n_angles, int(math.ceil(4.0 * model.p_max * osc_scale)))
    r, wr = radial_rule(model.p_max, jump.delta, osc_scale, order=order, refine=refine)
    u, wu = _angular_rule(d, n_angles)
    pts = (r[:, None, None] * u[None, :, :]).reshape(-1, d)
    sig = np.asarray(eval_sigma(model, pts), dtype=float).reshape(r.size, u.shape[0])
    w = (wr * r ** (d - 1))[:, None] * wu[None, :] * sig
    return pts, w.ravel()


def measure_integral(
    jump: JumpMeasure, f: Callable[[np.ndarray], np.ndarray] | None = None, **rule_kw
) -> float:
    """int f(p) sigma(p) dp over the (possibly truncated) support; f=None means f=1."""
    pts, w = sigma_rule(jump, **rule_kw)
    if f is None:
        return float(w.sum())
    return float(np.dot(w, np.asarray(f(pts), dtype=float)))


# ---------------------------------------------------------------------------
# Characteristic exponent
# ---------------------------------------------------------------------------


def psi_batch(jump: JumpMeasure, qs: np.ndarray, order: int = 12, refine: int = 1) -> np.ndarray:
    """Characteristic exponent at many q at once, sharing one node set.

    psi(q) = int sigma(p) (cos(p.q) - 1) dp.  The imaginary part vanishes by
    the evenness of sigma and is never computed.
    """
    qpts = as_points(qs, jump.model.dimension)
    osc = float(np.max(np.linalg.norm(qpts, axis=-1))) if qpts.size else 0.0
    pts, w = sigma_rule(jump, osc_scale=osc, order=order, refine=refine)
    phases = pts @ qpts.T
    return (np.cos(phases) - 1.0).T @ w


def psi(jump: JumpMeasure, q, rtol: float = 1e-8) -> float:
    """Characteristic exponent psi(q) <= 0 with a mesh-refinement accuracy check.

    Always integrates the full (untruncated) measure: near p = 0 the factor
    1 - cos(p.q) = O(|p|^2) makes the integrand absolutely integrable.
    """
    full = jump if jump.delta == 0.0 else truncated(jump, 0.0)
    qv = as_points(q, jump.model.dimension)
    if np.all(np.linalg.norm(qv, axis=-1) == 0.0):
        return 0.0
    coarse = psi_batch(full, qv, refine=2)[0]
    fine = psi_batch(full, qv, refine=4)[0]
    if abs(fine - coarse) > max(rtol * abs(fine), 1e-13):
        finer = psi_batch(full, qv, refine=8)[0]
        if abs(finer - fine) > max(rtol * abs(finer), 1e-13):
            raise RuntimeError(
                f"characteristic-exponent quadrature did not converge at q={q!r}"
            )
        fine = finer
    return float(fine)


def psi_path_integral(jump: JumpMeasure, q, y, t: float, rtol: float = 1e-7) -> float:
    """Time integral int_0^t psi(q + u*y) du by adaptive quadrature in u."""
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return 0.0
    d = jump.model.dimension
    qv = as_points(q, d)[0]
    yv = as_points(y, d)[0]
    if np.all(yv == 0.0):
        return t * psi(jump, qv)
    val, _ = integrate.quad(
        lambda u: psi(jump, qv + u * yv), 0.0, t, epsrel=rtol, epsabs=1e-12, limit=200
    )
    return float(val)


class PsiTable:
    """Dense radial interpolant of psi for isotropic models (d = 1 currently).

    Built once from the same graded quadrature as :func:`psi`; the cubic
    spline and its antiderivative turn the per-dual-point damping integral
    int_0^t psi(q + u y) du into two interpolant lookups:

        (Phi(q + t*y) - Phi(q)) / y          (y != 0; Phi odd),

    which is what makes the Fourier solver affordable on a full grid.
    """

    def __init__(self, jump: JumpMeasure, q_max: float, spacing: float = 0.02):
        from scipy.interpolate import CubicSpline

        if jump.model.dimension != 1 and jump.model.anisotropy is not None:
            raise NotImplementedError("PsiTable requires an isotropic model")
        self.jump = jump
        self.q_max = float(q_max)
        n = max(64, int(math.ceil(self.q_max / spacing)) + 1)
        grid = np.linspace(0.0, self.q_max, n)
        vals = np.empty(n)
        vals[0] = 0.0
        full = jump if jump.delta == 0.0 else truncated(jump, 0.0)
        if jump.model.dimension == 1:
            vals[1:] = psi_batch(full, grid[1:], refine=2)
        else:
            # isotropic d >= 2: psi is radial, table along a fixed direction
            e1 = np.zeros(jump.model.dimension)
            e1[0] = 1.0
            vals[1:] = psi_batch(full, grid[1:, None] * e1[None, :], refine=2)
        self._spline = CubicSpline(grid, vals)
        self._anti = self._spline.antiderivative()

    def psi_values(self, q: np.ndarray) -> np.ndarray:
        """psi at signed radii q (even extension)."""
        aq = np.abs(q)
        if np.any(aq > self.q_max * (1.0 + 1e-12)):
            raise ValueError("psi table evaluated beyond its tabulated range")
        return self._spline(np.minimum(aq, self.q_max))

    def _phi(self, q: np.ndarray) -> np.ndarray:
        aq = np.minimum(np.abs(q), self.q_max)
        return np.sign(q) * self._anti(aq)

    def damping_exponent(self, q: np.ndarray, y: np.ndarray, t: float) -> np.ndarray:
        """int_0^t psi(q + u*y) du, elementwise over broadcast (q, y)."""
        q = np.asarray(q, dtype=float)
        y = np.asarray(y, dtype=float)
        qb, yb = np.broadcast_arrays(q, y)
        out = np.empty(qb.shape)
        still = yb == 0.0
        out[still] = t * self.psi_values(qb[still])
        mov = ~still
        ym = yb[mov]
        out[mov] = (self._phi(qb[mov] + t * ym) - self._phi(qb[mov])) / ym
        return out


_PSI_TABLES: dict = {}


def psi_table(jump: JumpMeasure, q_max: float) -> PsiTable:
    """Session cache of psi tables, bucketed so nearby ranges share a table."""
    bucket = 2.0 ** math.ceil(math.log2(max(q_max, 1.0)))
    key = (jump, bucket)
    tab = _PSI_TABLES.get(key)
    if tab is None:
        tab = PsiTable(jump, bucket)
        _PSI_TABLES[key] = tab
    return tab


# ---------------------------------------------------------------------------
# Classification and regularity diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecorrelationReport:
    status: str  # LONG_RANGE | SHORT_RANGE | INCONCLUSIVE
    fitted_exponent: float
    predicted_theta: float
    matches_prediction: bool
    radii: np.ndarray = field(repr=False)
    shell_integrals: np.ndarray = field(repr=False)


def _r0_over_gap_shells(model: SpectrumModel, radii: np.ndarray) -> np.ndarray:
    """Cumulative integrals of r0hat/gap over {r_n < |p| < p_max}."""
    d = model.dimension
    u, wu = _angular_rule(d)
    omega = float(wu.sum())
    totals = np.empty(radii.size)
    prev_edge = model.p_max
    acc = 0.0
    for i, r_lo in enumerate(radii):
        r, wr = radial_rule(prev_edge, r_lo, order=16, n_shells=8)
        if model.anisotropy is None:
            f = model.amplitude(r) / (
                r ** (d + 2.0 * model.alpha - 2.0) * model.nu * r ** (2.0 * model.beta)
            )
            acc += omega * float(np.dot(wr, f * r ** (d - 1)))
        else:
            pts = (r[:, None, None] * u[None, :, :]).reshape(-1, d)
            vals = np.asarray(r0hat(model, pts), dtype=float) / np.asarray(
                gap(model, pts), dtype=float
            )
            acc += float(
                np.dot(
                    (wr * r ** (d - 1)),
                    vals.reshape(r.size, u.shape[0]) @ wu,
                )
            )
        totals[i] = acc
        prev_edge = r_lo
    return totals


def classify_decorrelation(model: SpectrumModel, n_shells: int = 26) -> DecorrelationReport:
    """Estimate whether int r0hat/gap dp diverges and at what rate.

    Integrates over shells |p| in [r_n, p_max] with r_n -> 0 geometrically and
    fits the growth exponent of the shell sums on log-log axes.
    """
    radii = model.p_max * 0.5 ** np.arange(1, n_shells + 1)
    totals = _r0_over_gap_shells(model, radii)
    tail = slice(-8, None)
    slope = np.polyfit(np.log(radii[tail]), np.log(totals[tail]), 1)[0]
    fitted = -float(slope)
    predicted = model.theta
    last_increment = (totals[-1] - totals[-2]) / totals[-1]
    noise = 0.02
    if fitted > noise:
        status = "LONG_RANGE"
    elif abs(fitted) <= noise and last_increment < 1e-3:
        status = "SHORT_RANGE"
    else:
        status = "INCONCLUSIVE"
    matches = abs(fitted - predicted) <= 0.1 * predicted if predicted > 0 else False
    return DecorrelationReport(status, fitted, predicted, matches, radii, totals)


def regularity_integrals(model: SpectrumModel, rtol: float = 1e-6) -> tuple[float, float, float]:
    """The three moment integrals int r0hat * |p|^m / gap^m dp, m = 1, 2, 3.

    All three must be finite for the kinetic limit to hold; quadrature
    non-convergence across mesh refinements is reported as a model-validation
    failure.
    """
    d = model.dimension
    _, wu = _angular_rule(d)
    omega = float(wu.sum())

    def moments(refine: int) -> np.ndarray:
        r, wr = radial_rule(model.p_max, 0.0, order=16, n_shells=100, refine=refine)
        base = model.amplitude(r) / r ** (d + 2.0 * model.alpha - 2.0)
        g = model.nu * r ** (2.0 * model.beta)
        out = np.empty(3)
        for m in (1, 2, 3):
            out[m - 1] = omega * float(np.dot(wr, base * (r / g) ** m * r ** (d - 1)))
        return out

    coarse = moments(1)
    fine = moments(2)
    rel = np.abs(fine - coarse) / np.maximum(np.abs(fine), 1e-300)
    if np.any(rel > rtol) or not np.all(np.isfinite(fine)):
        raise ModelValidationError(
            "regularity moment integrals did not converge under mesh refinement "
            f"(relative differences {rel.tolist()}); the model is outside the "
            "admissible long-range class"
        )
    return float(fine[0]), float(fine[1]), float(fine[2])


DEFAULT_MODEL = SpectrumModel()
