"""Exact transport solver via the double-Fourier damping formula.

In dual variables (y conjugate to x, q conjugate to k) the transport
equation with jump generator turns into a shear plus a multiplicative
damping:

    W_hat(t, y, q) = exp( int_0^t psi(q + u*y) du ) * W0_hat(y, q + t*y).

The shear q -> q + t*y is applied in the mixed (y, k) representation as the
modulation exp(-i*t*y*k), which evaluates the band-limited (trigonometric)
interpolant of W0_hat exactly for arbitrary t; the damping factor is a real
nonpositive exponent looked up from the tabulated characteristic exponent.
"""

from __future__ import annotations

import numpy as np

from .phasespace import PhaseSpaceGrid, WignerField
from .spectrum import JumpMeasure, PsiTable, psi_table

REALITY_TOL = 1e-10


class AliasingError(RuntimeError):
    """The requested time shears spectral content beyond the representable duals."""


def _check_aliasing(grid: PhaseSpaceGrid, t: float) -> None:
    span = 2.0 * grid.q_max
    if abs(t) * grid.y_max > span * (1.0 + 1e-12):
        raise AliasingError(
            f"t*max|y| = {abs(t) * grid.y_max:.6g} exceeds the q-domain width "
            f"{span:.6g}; enlarge L_k/n_k or reduce t"
        )


def _real_part(complex_values: np.ndarray) -> np.ndarray:
    scale = float(np.max(np.abs(complex_values.real))) or 1.0
    residue = float(np.max(np.abs(complex_values.imag))) / scale
    if residue > REALITY_TOL:
        raise RuntimeError(f"imaginary residue {residue:.3e} above {REALITY_TOL}")
    return np.ascontiguousarray(complex_values.real)


def _sheared_spectrum(w0: WignerField, t: float) -> np.ndarray:
    """W0_hat(y, q + t*y) on the dual grid, in FFT bin order, exact shear.

    The unpaired y-Nyquist row cannot be sheared consistently (it stands for
    both +/- Nyquist), so it is zeroed for t != 0; this is the usual
    band-limit ambiguity of fractional spectral shifts and costs nothing for
    data that are band-limited in practice.
    """
    g = w0.grid
    mixed = np.fft.fft(w0.values, axis=0)
    if t != 0.0:
        mixed[g.n_x // 2, :] = 0.0
    mixed *= np.exp(-1j * t * np.outer(g.y(), g.k()))
    return np.fft.fft(mixed, axis=1)


def _invert(spectrum: np.ndarray, time_stamp: float, grid: PhaseSpaceGrid) -> WignerField:
    out = np.fft.ifft(np.fft.ifft(spectrum, axis=1), axis=0)
    return WignerField(grid, _real_part(out), time_stamp)


def free_transport(w0: WignerField, t: float) -> WignerField:
    """Pure shear W0(x - t*k, k) on the periodic grid (unit damping)."""
    if t == 0.0:
        return WignerField(w0.grid, w0.values.copy(), w0.time_stamp)
    _check_aliasing(w0.grid, t)
    return _invert(_sheared_spectrum(w0, t), w0.time_stamp + t, w0.grid)


def damping_exponents(
    grid: PhaseSpaceGrid, jump: JumpMeasure, t: float, table: PsiTable | None = None
) -> np.ndarray:
    """int_0^t psi(q + u*y) du on the dual grid (y rows, q columns)."""
    reach = grid.q_max + t * grid.y_max
    tab = table if table is not None else psi_table(jump, reach)
    return tab.damping_exponent(grid.q()[None, :], grid.y()[:, None], t)


def apply_damping(spec: np.ndarray, grid: PhaseSpaceGrid, exponents: np.ndarray) -> None:
    """Multiply a dual-grid spectrum by exp(exponents) in place.

    The q-Nyquist column is zeroed first: that bin stands for both +Q and -Q
    while the damping exponent differs between them, so it cannot be damped
    consistently (same band-limit ambiguity as the shear row).
    """
    spec[:, grid.n_k // 2] = 0.0
    spec *= np.exp(exponents)


def solve_fourier(
    w0: WignerField, jump: JumpMeasure, t: float, table: PsiTable | None = None
) -> WignerField:
    """Propagate w0 for time t >= 0 under transport plus the jump generator.

    Nonexpansive in L2 (the damping exponent is <= 0); for t = 0 it returns
    w0 exactly up to FFT round-off.
    """
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return WignerField(w0.grid, w0.values.copy(), w0.time_stamp)
    _check_aliasing(w0.grid, t)
    spec = _sheared_spectrum(w0, t)
    apply_damping(spec, w0.grid, damping_exponents(w0.grid, jump, t, table))
    return _invert(spec, w0.time_stamp + t, w0.grid)
