"""Periodic phase-space grids and the fields that live on them.

A WignerField is the common currency of every solver: real samples on a
periodic (x, k) rectangle.  All grid quadrature conventions (L2 norm, inner
products, spectral masses) are defined here so the solvers cannot drift
apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class GridError(ValueError):
    """Grid parameters inconsistent with the requested operation."""


def _is_pow2(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Periodic (x, k) grid: x in [-L_x, L_x), k in [-L_k, L_k), power-of-two sizes."""

    n_x: int = 256
    n_k: int = 256
    L_x: float = 8.0 * math.pi
    L_k: float = 8.0 * math.pi

    def __post_init__(self):
        if not (_is_pow2(self.n_x) and _is_pow2(self.n_k)):
            raise GridError("n_x and n_k must be powers of two")
        if self.L_x <= 0 or self.L_k <= 0:
            raise GridError("domain half-widths must be positive")

    @property
    def dx(self) -> float:
        return 2.0 * self.L_x / self.n_x

    @property
    def dk(self) -> float:
        return 2.0 * self.L_k / self.n_k

    def x(self) -> np.ndarray:
        return -self.L_x + self.dx * np.arange(self.n_x)

    def k(self) -> np.ndarray:
        return -self.L_k + self.dk * np.arange(self.n_k)

    def y(self) -> np.ndarray:
        """Dual of x, in FFT bin order."""
        return 2.0 * math.pi * np.fft.fftfreq(self.n_x, d=self.dx)

    def q(self) -> np.ndarray:
        """Dual of k, in FFT bin order."""
        return 2.0 * math.pi * np.fft.fftfreq(self.n_k, d=self.dk)

    @property
    def y_max(self) -> float:
        return math.pi / self.dx

    @property
    def q_max(self) -> float:
        return math.pi / self.dk


@dataclass(frozen=True)
class WignerField:
    """Real phase-space samples with grid metadata."""

    grid: PhaseSpaceGrid
    values: np.ndarray = field(repr=False)
    time_stamp: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_x, self.grid.n_k):
            raise GridError(
                f"values shape {v.shape} does not match grid ({self.grid.n_x}, {self.grid.n_k})"
            )
        if not np.all(np.isfinite(v)):
            raise GridError("field values must be finite")
        object.__setattr__(self, "values", v)

    def with_values(self, values: np.ndarray, time_stamp: float | None = None) -> "WignerField":
        ts = self.time_stamp if time_stamp is None else time_stamp
        return WignerField(self.grid, values, ts)


def l2_norm(w: WignerField) -> float:
    """Grid quadrature of the L2 norm: sqrt(dx*dk*sum(values^2))."""
    g = w.grid
    return math.sqrt(g.dx * g.dk * float(np.sum(w.values**2)))


def inner(w: WignerField, other) -> float:
    """Grid inner product <w, other> with dx*dk measure."""
    g = w.grid
    vals = other.values if isinstance(other, WignerField) else np.asarray(other, dtype=float)
    return g.dx * g.dk * float(np.sum(w.values * vals))


def spectral_tail_mass(w: WignerField, cutoff: float) -> float:
    """Fraction of squared spectral mass at dual radii max(|y|, |q|) > cutoff."""
    g = w.grid
    if cutoff >= min(g.y_max, g.q_max):
        raise GridError(
            f"cutoff {cutoff} is not below the grid Nyquist {min(g.y_max, g.q_max)}"
        )
    spec = np.abs(np.fft.fft2(w.values)) ** 2
    yy = np.abs(g.y())[:, None]
    qq = np.abs(g.q())[None, :]
    tail = np.maximum(yy, qq) > cutoff
    total = float(spec.sum())
    if total == 0.0:
        return 0.0
    return float(spec[tail].sum()) / total


def gaussian_field(
    grid: PhaseSpaceGrid,
    x0: float = 0.0,
    k0: float = 0.0,
    sx: float = 1.0,
    sk: float = 1.0,
    amplitude: float = 1.0,
    time_stamp: float = 0.0,
) -> WignerField:
    """Separable Gaussian bump, the workhorse initial datum of the test suite."""
    x = grid.x()
    k = grid.k()
    vx = np.exp(-((x - x0) ** 2) / (2.0 * sx**2))
    vk = np.exp(-((k - k0) ** 2) / (2.0 * sk**2))
    return WignerField(grid, amplitude * vx[:, None] * vk[None, :], time_stamp)


def indicator_field(
    grid: PhaseSpaceGrid,
    half_width_x: float = 2.0,
    half_width_k: float = 1.0,
) -> WignerField:
    """Sharp-edged box datum used to probe the instantaneous regularization."""
    x = grid.x()
    k = grid.k()
    vals = (
        (np.abs(x)[:, None] <= half_width_x) & (np.abs(k)[None, :] <= half_width_k)
    ).astype(float)
    return WignerField(grid, vals)


# Fixed library of smooth, compactly concentrated observables used by the
# weak-convergence metric: separable Gaussians, varied centers and widths.
TEST_FUNCTIONS: tuple[tuple[float, float, float, float], ...] = (
    (0.0, 0.0, 2.0, 0.8),
    (2.0, 0.5, 2.0, 0.8),
    (-2.0, -0.5, 2.0, 0.8),
    (4.0, 1.0, 2.5, 1.0),
    (-4.0, 1.0, 2.5, 1.0),
    (0.0, 1.5, 3.0, 0.6),
    (0.0, -1.5, 3.0, 0.6),
    (1.0, 0.0, 1.5, 1.2),
    (-1.0, 0.0, 1.5, 1.2),
    (3.0, -1.0, 2.0, 0.9),
    (-3.0, 1.0, 2.0, 0.9),
    (5.0, 0.0, 3.0, 1.1),
    (-5.0, 0.0, 3.0, 1.1),
    (0.0, 2.0, 2.5, 0.7),
    (2.5, -1.5, 1.8, 0.8),
    (-2.5, 1.5, 1.8, 0.8),
)


def test_function(grid: PhaseSpaceGrid, test_id: int) -> WignerField:
    """Entry ``test_id`` of the fixed observable library, sampled on ``grid``."""
    if not 0 <= test_id < len(TEST_FUNCTIONS):
        raise IndexError(f"test_id must be in [0, {len(TEST_FUNCTIONS)})")
    x0, k0, sx, sk = TEST_FUNCTIONS[test_id]
    return gaussian_field(grid, x0, k0, sx, sk)


def weak_observable(w: WignerField, test_id: int) -> float:
    """Grid inner product of ``w`` against library observable ``test_id``."""
    return inner(w, test_function(w.grid, test_id))
