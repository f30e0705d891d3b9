"""Direct wave simulation and the empirical check of the kinetic limit.

The scaled wave equation evolved here is

    i*eps dPsi/dt = -(eps^2/2) Lap Psi + eps^{(1-gamma)/2} V(t/eps^{1+gamma}, x/eps) Psi,

integrated by Strang splitting: exact kinetic half-steps in Fourier space
around a full potential step that samples the Ornstein-Uhlenbeck field at
the sub-interval midpoint (the field transition itself is exact, so the only
time-stepping errors are the splitting commutator and midpoint sampling).

The phase-space energy density is extracted with the scale-matched Wigner
transform; commensurability between the offset lattice and the simulation
grid (eps * dy / 2 = integer * dx) is required so the quadratic kernel never
interpolates.  The kinetic-limit experiment compares the ensemble- and
mixture-averaged Wigner field against the transport solver through a fixed
library of weak observables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .field import FieldState, SpatialGrid, advance_field, init_field, realize_potential
from .fourier import solve_fourier
from .phasespace import (
    GridError,
    PhaseSpaceGrid,
    TEST_FUNCTIONS,
    WignerField,
    inner,
    test_function,
)
from .spectrum import JumpMeasure, SpectrumModel, jump_measure


@dataclass
class WaveField:
    """One or more wave functions on the macroscopic grid (rows = ensemble)."""

    psi: np.ndarray
    epsilon: float
    gamma: float
    grid: SpatialGrid
    time: float = 0.0

    def __post_init__(self):
        self.psi = np.atleast_2d(np.asarray(self.psi, dtype=complex))
        if self.psi.shape[-1] != self.grid.n:
            raise GridError("psi length does not match the grid")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in the open interval (0, 1)")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")

    def l2_norms(self) -> np.ndarray:
        return np.sqrt(self.grid.dx * np.sum(np.abs(self.psi) ** 2, axis=-1))


@dataclass(frozen=True)
class MixtureConfig:
    """Quadrature over the random initial phase: nodes, weights, base profile."""

    q_samples: np.ndarray
    weights: np.ndarray
    base_profile: Callable[[np.ndarray], np.ndarray]
    mu_density: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0.0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must be nonnegative and sum to 1")


def gaussian_mixture(
    n_nodes: int = 32, mu_std: float = 1.0, phi_width: float = 2.0, q_cut: float = 4.0
) -> MixtureConfig:
    """Uniform-lattice discretization of a centered Gaussian phase distribution.

    A uniform midpoint lattice keeps the node spacing constant: once it is
    below the eps-scale Wigner kernel width, the atomized mixture blends into
    a smooth k-profile (the Poisson-summation ripple is exponentially small).
    The tail beyond ``q_cut`` is dropped and the weights renormalized; the
    base profile is an L2-normalized Gaussian.
    """
    dq = 2.0 * q_cut / n_nodes
    q = -q_cut + dq * (np.arange(n_nodes) + 0.5)

    def density(k):
        return np.exp(-np.asarray(k) ** 2 / (2 * mu_std**2)) / math.sqrt(2 * math.pi * mu_std**2)

    w = density(q)
    w = w / w.sum()

    def profile(x):
        return (math.pi * phi_width**2) ** -0.25 * np.exp(-np.asarray(x) ** 2 / (2 * phi_width**2))

    return MixtureConfig(q, w, profile, density)


def mixture_waves(
    mix: MixtureConfig, grid: SpatialGrid, epsilon: float, gamma: float
) -> WaveField:
    """Initial ensemble psi_q(x) = phi0(x) * exp(i q x / eps), one row per node."""
    x = grid.x()
    base = mix.base_profile(x)[None, :]
    phases = np.exp(1j * np.outer(mix.q_samples, x) / epsilon)
    return WaveField(base * phases, epsilon, gamma, grid)


def limit_wigner(mix: MixtureConfig, grid: PhaseSpaceGrid) -> WignerField:
    """The small-eps limit of the mixture's Wigner transform: mu(k)|phi0(x)|^2.

    Derived directly from the averaged quadratic form; note this is the phase
    DENSITY in k, not its Fourier transform.
    """
    px = np.abs(mix.base_profile(grid.x())) ** 2
    pk = mix.mu_density(grid.k())
    return WignerField(grid, px[:, None] * pk[None, :])


def split_step_evolve(
    wave: WaveField,
    field: FieldState,
    dt_slow: float,
    n_steps: int,
    k_content: float | None = None,
    freeze_potential: bool = False,
) -> WaveField:
    """Strang-split evolution over n_steps of size dt_slow (mutates wave/field).

    Preconditions (violations abort with the offending bound):
      * kinetic phase resolved: eps * k_content^2 * dt/2 < 0.5, where
        ``k_content`` bounds the occupied simulation wavenumbers (defaults to
        the grid Nyquist, which is conservative);
      * fast decorrelation resolved: gap_max * dt_fast <= 0.1 with
        dt_fast = dt_slow / eps^(1+gamma) (skipped for a frozen potential).

    The field must live on the fast-scale copy of the wave grid (same point
    count, half-width divided by eps).
    """
    eps, gamma = wave.epsilon, wave.gamma
    grid = wave.grid
    if field.grid.n != grid.n or abs(field.grid.half_width - grid.half_width / eps) > 1e-9:
        raise GridError("field grid must be the wave grid rescaled by 1/eps")
    if k_content is None:
        k_content = grid.nyquist
    kinetic_phase = eps * k_content**2 * dt_slow / 2.0
    if kinetic_phase >= 0.5:
        raise ValueError(
            f"kinetic phase per step {kinetic_phase:.3g} >= 0.5; reduce dt below "
            f"{0.5 * 2.0 / (eps * k_content**2):.3g}"
        )
    dt_fast = dt_slow / eps ** (1.0 + gamma)
    if not freeze_potential and field.model.gap_max * dt_fast > 0.1:
        raise ValueError(
            f"fast decorrelation unresolved: gap_max*dt_fast = "
            f"{field.model.gap_max * dt_fast:.3g} > 0.1; reduce dt below "
            f"{0.1 * eps ** (1.0 + gamma) / field.model.gap_max:.3g}"
        )
    xi = 2.0 * math.pi * np.fft.fftfreq(grid.n, d=grid.dx)
    kin_half = np.exp(-0.5j * eps * xi**2 * (dt_slow / 2.0))
    coupling = eps ** (-(1.0 + gamma) / 2.0)
    psi = wave.psi
    v_frozen = realize_potential(field) if freeze_potential else None
    for _ in range(n_steps):
        psi = np.fft.ifft(np.fft.fft(psi, axis=-1) * kin_half, axis=-1)
        if freeze_potential:
            v_mid = v_frozen
        else:
            advance_field(field, dt_fast / 2.0)
            v_mid = realize_potential(field)
            advance_field(field, dt_fast / 2.0)
        psi = psi * np.exp(-1j * coupling * dt_slow * v_mid)[None, :]
        psi = np.fft.ifft(np.fft.fft(psi, axis=-1) * kin_half, axis=-1)
    wave.psi = psi
    wave.time += n_steps * dt_slow
    return wave


def wigner_grid(
    sim_grid: SpatialGrid, epsilon: float, offset_step: int = 1, n_y: int = 256, coarsen: int | None = None
) -> tuple[PhaseSpaceGrid, int]:
    """Phase-space output grid commensurate with the simulation lattice.

    The Wigner offsets are y_j = j*dy with eps*dy/2 = offset_step*dx exactly,
    so the quadratic kernel reads grid values without interpolation; the
    conjugate k-window follows as k_max = pi/dy.
    """
    if coarsen is None:
        coarsen = max(1, sim_grid.n // 256)
    if sim_grid.n % coarsen:
        raise GridError("coarsening factor must divide the simulation size")
    dy = 2.0 * offset_step * sim_grid.dx / epsilon
    if n_y * offset_step > sim_grid.n:
        raise GridError("offset lattice exceeds the simulation domain")
    k_max = math.pi / dy
    grid = PhaseSpaceGrid(sim_grid.n // coarsen, n_y, sim_grid.half_width, k_max)
    return grid, coarsen


def wigner_transform(
    psis: np.ndarray,
    weights: np.ndarray,
    sim_grid: SpatialGrid,
    epsilon: float,
    offset_step: int = 1,
    n_y: int = 256,
    coarsen: int | None = None,
) -> WignerField:
    """Mixture-averaged scale-eps Wigner transform on a commensurate grid.

    Rejects inadmissible eps/grid combinations (the offset eps*dy/2 must land
    exactly on the simulation lattice).  The averaged correlation is
    Hermitian in the offset, so the output is real to rounding; the unpaired
    extreme offset bin is dropped to keep that exact.
    """
    psis = np.atleast_2d(psis)
    w = np.asarray(weights, dtype=float)
    grid, coarsen = wigner_grid(sim_grid, epsilon, offset_step, n_y, coarsen)
    dy = 2.0 * offset_step * sim_grid.dx / epsilon
    if abs(epsilon * dy / 2.0 - offset_step * sim_grid.dx) > 1e-12 * sim_grid.dx:
        raise GridError("eps*dy/2 does not land on the simulation lattice")
    n_out = grid.n_x
    j = np.arange(-n_y // 2, n_y // 2)
    base = (np.arange(n_out) * coarsen)[:, None]
    idx_m = (base - j[None, :] * offset_step) % sim_grid.n
    idx_p = (base + j[None, :] * offset_step) % sim_grid.n
    corr = np.zeros((n_out, n_y), dtype=complex)
    for m in range(psis.shape[0]):
        corr += w[m] * psis[m][idx_m] * np.conj(psis[m][idx_p])
    # The extreme offset -n_y/2 is its own Hermitian partner (its transform
    # phases are real), so only its real part is consistent with a real field.
    corr[:, 0] = corr[:, 0].real
    signs = np.where(j % 2 == 0, 1.0, -1.0)
    spec = np.fft.ifftshift(corr * signs[None, :], axes=1)
    vals = np.fft.ifft(spec, axis=1) * (n_y * dy / (2.0 * math.pi))
    residue = float(np.max(np.abs(vals.imag))) / max(float(np.max(np.abs(vals.real))), 1e-300)
    if residue > 1e-10:
        raise RuntimeError(f"Wigner reality residue {residue:.3e} above 1e-10")
    return WignerField(grid, np.ascontiguousarray(vals.real))


def weak_observable(w: WignerField, test_id: int) -> float:
    """Inner product against entry ``test_id`` of the fixed observable library."""
    return inner(w, test_function(w.grid, test_id))


# ---------------------------------------------------------------------------
# The kinetic-limit experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentRow:
    epsilon: float
    observable_id: int
    value_schrodinger: float
    value_kinetic: float
    ensemble_std: float
    d_epsilon: float


@dataclass(frozen=True)
class ExperimentReport:
    rows: list[ExperimentRow]
    d_by_epsilon: dict[float, float]
    std_by_epsilon: dict[float, np.ndarray] = dc_field(repr=False)


def _field_seed(seed: int, v: int) -> int:
    return (seed ^ ((v + 1) * 0x9E3779B97F4A7C15)) & 0xFFFFFFFFFFFFFFFF


def _pick_dt(eps: float, gamma: float, t: float, k_bound: float, gap_max: float) -> tuple[float, int]:
    dt = 0.9 * min(
        eps / k_bound**2,                       # kinetic phase < 0.5
        0.1 * eps ** (1.0 + gamma) / max(gap_max, 1e-300),
        t / 8.0,
    )
    n_steps = max(8, int(math.ceil(t / dt)))
    return t / n_steps, n_steps


def kinetic_limit_experiment(
    model: SpectrumModel,
    t: float = 0.5,
    gamma: float = 0.5,
    epsilons: tuple[float, ...] = (0.5, 0.25, 0.125),
    n_potential: int = 64,
    mixture: MixtureConfig | None = None,
    seed: int = 2024,
    half_width: float = 32.0,
    points_per_eps: int = 8,
    n_y: int = 256,
    freeze_potential: bool = False,
    jump: JumpMeasure | None = None,
) -> ExperimentReport:
    """Weak-convergence trend of the averaged Wigner field toward the kinetic solution.

    For each eps the mixture ensemble is evolved under ``n_potential``
    independent potentials; the averaged Wigner field is compared with the
    transport solution through the 16-entry observable library via

        D(eps) = sum_j 2^-j |<W_eps(t) - W(t), g_j>|,

    and the per-observable ensemble standard deviation across potential
    realizations is reported (the self-averaging diagnostic).  No rate is
    asserted; the qualitative content is that both columns shrink with eps.
    """
    if mixture is None:
        mixture = gaussian_mixture()
    if jump is None:
        jump = jump_measure(model)
    if n_potential < 2:
        raise ValueError("n_potential must be at least 2 for the spread diagnostic")
    k_bound = float(np.max(np.abs(mixture.q_samples))) + 4.0
    rows: list[ExperimentRow] = []
    d_by_eps: dict[float, float] = {}
    std_by_eps: dict[float, np.ndarray] = {}
    for eps in epsilons:
        n_sim = int(round(2.0 * half_width * points_per_eps / eps))
        if n_sim & (n_sim - 1):
            raise GridError(
                f"eps={eps} with points_per_eps={points_per_eps} and half_width="
                f"{half_width} gives a non-power-of-two grid ({n_sim})"
            )
        sim_grid = SpatialGrid(n_sim, half_width)
        fast_grid = SpatialGrid(n_sim, half_width / eps)
        out_grid, _ = wigner_grid(sim_grid, eps, offset_step=1, n_y=n_y)
        if t > 0:
            dt, n_steps = _pick_dt(eps, gamma, t, k_bound, model.gap_max)
        w_sum = np.zeros((out_grid.n_x, out_grid.n_k))
        obs = np.empty((len(TEST_FUNCTIONS), n_potential))
        for v in range(n_potential):
            fld = init_field(model, fast_grid, _field_seed(seed, v))
            wave = mixture_waves(mixture, sim_grid, eps, gamma)
            if t > 0:
                split_step_evolve(
                    wave, fld, dt, n_steps, k_content=k_bound / eps,
                    freeze_potential=freeze_potential,
                )
            w_v = wigner_transform(wave.psi, mixture.weights, sim_grid, eps, n_y=n_y)
            w_sum += w_v.values
            for gidx in range(len(TEST_FUNCTIONS)):
                obs[gidx, v] = weak_observable(w_v, gidx)
        w_mean = WignerField(out_grid, w_sum / n_potential, t)
        w_kin = solve_fourier(limit_wigner(mixture, out_grid), jump, t) if t > 0 else limit_wigner(mixture, out_grid)
        d_eps = 0.0
        kin_vals = []
        for gidx in range(len(TEST_FUNCTIONS)):
            kin_vals.append(weak_observable(w_kin, gidx))
            d_eps += 2.0 ** -(gidx + 1) * abs(float(obs[gidx].mean()) - kin_vals[-1])
        stds = obs.std(axis=1, ddof=1)
        d_by_eps[eps] = d_eps
        std_by_eps[eps] = stds
        for gidx in range(len(TEST_FUNCTIONS)):
            rows.append(
                ExperimentRow(
                    epsilon=eps,
                    observable_id=gidx,
                    value_schrodinger=float(obs[gidx].mean()),
                    value_kinetic=kin_vals[gidx],
                    ensemble_std=float(stds[gidx]),
                    d_epsilon=d_eps,
                )
            )
    return ExperimentReport(rows, d_by_eps, std_by_eps)
