"""Spectral synthesis of the time-dependent Gaussian potential.

The potential is carried by discrete Fourier modes on the grid's fundamental
wavenumber lattice.  Each mode is an independent Ornstein-Uhlenbeck process
with decay rate gap(p_j) and stationary variance equal to the cell-averaged
spectral mass, so the realized field is stationary in time with the target
two-point statistics at grid resolution.  Mode updates use the exact OU
transition; there is no time-discretization bias.

Only the modes with j >= 0 are stored; the j < 0 partners are implied by
Hermitian symmetry, so the realized field is real by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .phasespace import GridError
from .spectrum import SpectrumModel, gap, r0hat


@dataclass(frozen=True)
class SpatialGrid:
    """Periodic 1-d grid: n points on [-half_width, half_width)."""

    n: int
    half_width: float

    def __post_init__(self):
        if self.n < 4 or self.n % 2:
            raise GridError("n must be an even integer >= 4")
        if self.half_width <= 0:
            raise GridError("half_width must be positive")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def fundamental(self) -> float:
        """Mode spacing pi / half_width."""
        return math.pi / self.half_width

    @property
    def nyquist(self) -> float:
        return math.pi / self.dx

    def x(self) -> np.ndarray:
        return -self.half_width + self.dx * np.arange(self.n)


def _cell_mass(model: SpectrumModel, lo: float, hi: float) -> float:
    """(2*pi)^d * integral of r0hat over [lo, hi], graded if the cell touches 0."""
    hi = min(hi, model.p_max)
    if hi <= lo:
        return 0.0
    xg, wg = leggauss(12)
    if lo <= 0.0:
        # geometric panels absorb the |p|**-(d+2a-2) singularity
        edges = hi * 0.5 ** np.arange(60, -1, -1)
    else:
        edges = np.linspace(lo, hi, 4)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    r = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    vals = np.asarray(r0hat(model, r), dtype=float)
    return (2.0 * math.pi) ** model.dimension * float(np.dot(w, vals))


from functools import lru_cache


@lru_cache(maxsize=32)
def _mode_table(model: SpectrumModel, grid: SpatialGrid):
    """Shared per-(model, grid) tables: lattice, cell variances, decay rates."""
    dp = grid.fundamental
    n_modes = int(math.floor(model.p_max / dp + 0.5)) + 1
    if n_modes - 1 >= grid.n // 2:
        raise GridError("spectral support reaches the grid Nyquist bin")
    wavenumbers = dp * np.arange(n_modes)
    half = dp / 2.0
    variance = np.array([_cell_mass(model, p - half, p + half) for p in wavenumbers])
    variance[0] = _cell_mass(model, 0.0, half) * 2.0  # even cell around 0
    decay = np.asarray(gap(model, np.maximum(wavenumbers, 1e-300)), dtype=float)
    decay[0] = 0.0  # the p=0 mode carries no spectral gap: pure persistence
    wavenumbers.setflags(write=False)
    variance.setflags(write=False)
    decay.setflags(write=False)
    return wavenumbers, variance, decay


class FieldState:
    """Mutable mode amplitudes of one potential realization (d = 1).

    Attributes of interest: ``wavenumbers`` (nonnegative mode lattice),
    ``modes`` (complex amplitudes, index 0 real), ``mode_variance`` (their
    stationary variances), ``time``.
    """

    def __init__(self, model: SpectrumModel, grid: SpatialGrid, seed: int):
        if model.dimension != 1:
            raise NotImplementedError("field synthesis is implemented for d = 1")
        if grid.nyquist < model.p_max:
            raise GridError(
                f"grid too coarse: Nyquist {grid.nyquist:.4g} < p_max {model.p_max:.4g}"
            )
        self.model = model
        self.grid = grid
        self.seed = seed
        self.wavenumbers, self.mode_variance, self.decay = _mode_table(model, grid)
        n_modes = self.wavenumbers.size
        self.rng = np.random.Generator(
            np.random.Philox(key=np.array([seed, 0], dtype=np.uint64))
        )
        self.time = 0.0
        noise = self.rng.standard_normal((n_modes, 2))
        amp = np.sqrt(self.mode_variance)
        self.modes = amp * (noise[:, 0] + 1j * noise[:, 1]) / math.sqrt(2.0)
        self.modes[0] = amp[0] * noise[0, 0]

    def copy(self) -> "FieldState":
        import copy as _copy

        return _copy.deepcopy(self)


def init_field(model: SpectrumModel, grid: SpatialGrid, seed: int) -> FieldState:
    """Draw a stationary realization; Hermitian pairs share their draw."""
    return FieldState(model, grid, seed)


def advance_field(state: FieldState, dt: float) -> FieldState:
    """Exact OU transition over dt for every mode (mutates and returns state).

    mode <- e^{-g dt} * mode + sqrt(v * (1 - e^{-2 g dt})) * xi with xi a
    standard complex Gaussian (real for the frozen p=0 mode).
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    a = np.exp(-state.decay * dt)
    s = np.sqrt(state.mode_variance * (1.0 - a * a))
    noise = state.rng.standard_normal((state.modes.size, 2))
    xi = (noise[:, 0] + 1j * noise[:, 1]) / math.sqrt(2.0)
    xi[0] = noise[0, 0]
    state.modes = a * state.modes + s * xi
    state.time += dt
    return state


def realize_potential(state: FieldState) -> np.ndarray:
    """Inverse transform of the modes: real V on the grid, scaled by 1/(2*pi)^d.

    Hermitian symmetry is structural (only j >= 0 amplitudes exist), so the
    output is exactly real.
    """
    grid = state.grid
    n = grid.n
    half_spec = np.zeros(n // 2 + 1, dtype=complex)
    j = np.arange(state.modes.size)
    # grid points start at -half_width: e^{i p_j x} picks up the phase (-1)^j
    half_spec[: state.modes.size] = state.modes * np.where(j % 2, -1.0, 1.0)
    return np.fft.irfft(half_spec, n=n) * n / (2.0 * math.pi) ** state.model.dimension


def stationary_point_variance(state: FieldState) -> float:
    """Predicted Var V(x) on this grid: (2*pi)^-2d * (v_0 + 2 sum_j v_j)."""
    v = state.mode_variance
    return (v[0] + 2.0 * v[1:].sum()) / (2.0 * math.pi) ** (2 * state.model.dimension)


def covariance_kernel(state: FieldState, lag: float) -> float:
    """Predicted E[V(t+lag, x) V(t, x)] from the discrete modes."""
    v = state.mode_variance
    decay = np.exp(-state.decay * abs(lag))
    return float(v[0] * decay[0] + 2.0 * np.dot(v[1:], decay[1:])) / (
        2.0 * math.pi
    ) ** (2 * state.model.dimension)
