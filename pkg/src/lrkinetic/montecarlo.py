"""Jump-process Monte Carlo solver for the transport equation.

Realizes the probabilistic representation

    W(t, x, k) = E[ W0(x - t*k - int_0^t L_s ds,  k + L_t) ]

with a compound-Poisson approximation of the jump process: jumps smaller
than ``delta`` are dropped (their rate diverges in the long-range case), the
remaining measure has finite total rate and is sampled exactly.  The
occupation integral of a piecewise-constant path is computed in closed form,
so the only approximations are the small-jump truncation and the bilinear
field interpolation.

Determinism: paths are generated in fixed-size chunks from counter-based
streams keyed by (seed, chunk index), and every grid point accumulates its
path sum in path order, so results are bit-identical for any worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .phasespace import PhaseSpaceGrid, WignerField
from .spectrum import JumpMeasure, truncated

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

CHUNK = 4096


@dataclass(frozen=True)
class LevyPath:
    """One realization on [0, horizon]: ordered jump times and jump vectors."""

    jump_times: np.ndarray
    jumps: np.ndarray
    horizon: float

    def __post_init__(self):
        times = np.asarray(self.jump_times, dtype=float)
        if times.size and (np.any(np.diff(times) <= 0) or times[0] <= 0 or times[-1] > self.horizon):
            raise ValueError("jump times must be strictly increasing in (0, horizon]")

    def terminal(self) -> np.ndarray:
        """L_t at the horizon."""
        return self.jumps.sum(axis=0) if len(self.jumps) else np.zeros(self.jumps.shape[1])


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n_paths: int
    delta: float
    wrap_fraction: float = 0.0


@dataclass(frozen=True)
class FieldEstimate:
    field: WignerField
    stderr: np.ndarray
    n_paths: int
    delta: float
    wrap_fraction: float


# ---------------------------------------------------------------------------
# Jump sampling
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _radial_cdf_table(jump: JumpMeasure, delta: float, n_knots: int = 4096):
    """Log-spaced knots on (delta, p_max] with the cumulative radial jump mass.

    The mass density in radius is  Omega_d * sigma_rad(r) * r**(d-1); segment
    masses come from a Gauss rule per knot interval, so the table is exact up
    to quadrature and monotone by construction.
    """
    model = jump.model
    d = model.dimension
    if delta >= model.p_max:
        return None
    knots = np.geomspace(delta, model.p_max, n_knots)
    from numpy.polynomial.legendre import leggauss

    xg, wg = leggauss(8)
    mid = 0.5 * (knots[1:] + knots[:-1])
    half = 0.5 * (knots[1:] - knots[:-1])
    r = mid[:, None] + half[:, None] * xg[None, :]
    omega = 2.0 if d == 1 else 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
    expo = d + 2.0 * model.alpha - 2.0
    dens = (
        2.0
        * model.amplitude(r)
        / (r**expo * (2.0 * math.pi) ** d * model.nu * r ** (2.0 * model.beta))
        * r ** (d - 1)
        * omega
    )
    seg = (half[:, None] * wg[None, :] * dens).sum(axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    return knots, cum


def total_rate(jump: JumpMeasure, delta: float) -> float:
    """Total truncated scattering rate int_{|p|>delta} sigma(p) dp.

    Graded radial quadrature with a refinement check at 1e-8 relative; the
    result is cached per (measure, delta).  A truncation at or beyond p_max
    gives rate 0 (pure free transport).
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive (the untruncated rate diverges)")
    if delta >= jump.model.p_max:
        return 0.0
    return _total_rate_cached(jump, float(delta))


@lru_cache(maxsize=256)
def _total_rate_cached(jump: JumpMeasure, delta: float) -> float:
    from .spectrum import measure_integral

    trunc = truncated(jump, delta)
    fine = measure_integral(trunc, order=12, refine=2)
    for refine in (4, 8):
        finer = measure_integral(trunc, order=12, refine=refine)
        if abs(finer - fine) <= 1e-8 * abs(finer):
            return finer
        fine = finer
    return fine


def sample_radius(jump: JumpMeasure, delta: float, u: np.ndarray) -> np.ndarray:
    """Map uniforms to jump radii by inverse CDF on the tabulated radial mass."""
    table = _radial_cdf_table(jump, float(delta))
    if table is None:
        raise ValueError("delta >= p_max: the truncated measure is empty")
    knots, cum = table
    targets = np.asarray(u, dtype=float) * cum[-1]
    idx = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, len(knots) - 2)
    c0 = cum[idx]
    c1 = cum[idx + 1]
    frac = np.where(c1 > c0, (targets - c0) / np.maximum(c1 - c0, 1e-300), 0.0)
    logr = np.log(knots[idx]) + frac * (np.log(knots[idx + 1]) - np.log(knots[idx]))
    return np.exp(logr)


def _sample_directions(jump: JumpMeasure, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform directions; anisotropic profiles thinned by rejection.

    The isotropic radial table is an exact envelope because the anisotropy
    factor is bounded by 1.  Acceptance below 1% aborts: such a profile needs
    a dedicated sampler, not quieter failure.
    """
    d = jump.model.dimension
    aniso = jump.model.anisotropy
    out = np.empty((n, d))
    filled = 0
    drawn = 0
    while filled < n:
        batch = max(n - filled, 64)
        if d == 1:
            u = np.where(rng.random(batch) < 0.5, -1.0, 1.0)[:, None]
        else:
            vecs = rng.standard_normal((batch, d))
            u = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
        drawn += batch
        if aniso is not None:
            u = u[rng.random(batch) < np.asarray(aniso(u), dtype=float)]
        take = min(len(u), n - filled)
        out[filled : filled + take] = u[:take]
        filled += take
        if drawn >= 100 * n and filled < max(1, drawn // 100):
            raise RuntimeError(
                "direction rejection acceptance below 1%; the anisotropy profile "
                "is too far from its isotropic envelope"
            )
    return out


def sample_jump(jump: JumpMeasure, delta: float, rng: np.random.Generator) -> np.ndarray:
    """One jump vector distributed proportionally to sigma(p) on {|p| > delta}."""
    r = sample_radius(jump, delta, rng.random(1))
    u = _sample_directions(jump, 1, rng)
    return (r[:, None] * u)[0]


def sample_path(jump: JumpMeasure, delta: float, t: float, rng: np.random.Generator) -> LevyPath:
    """Compound-Poisson path on [0, t]: Poisson count, uniform order-statistic times."""
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    d = jump.model.dimension
    rate = total_rate(jump, delta) if delta < jump.model.p_max else 0.0
    n = int(rng.poisson(rate * t)) if t > 0 and rate > 0 else 0
    if n == 0:
        return LevyPath(np.empty(0), np.empty((0, d)), t)
    times = np.sort(rng.random(n)) * t
    radii = sample_radius(jump, delta, rng.random(n))
    dirs = _sample_directions(jump, n, rng)
    return LevyPath(times, radii[:, None] * dirs, t)


def occupation_integral(path: LevyPath) -> np.ndarray:
    """int_0^horizon L_s ds, exact: L is constant between jumps.

    Piecewise form sum_i L_(i) * (t_{i+1} - t_i) collapses to
    sum_j jump_j * (horizon - tau_j).
    """
    if len(path.jumps) == 0:
        return np.zeros(path.jumps.shape[1])
    return ((path.horizon - path.jump_times)[:, None] * path.jumps).sum(axis=0)


# ---------------------------------------------------------------------------
# Bulk path generation (chunked, counter-based, worker-count independent)
# ---------------------------------------------------------------------------


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, chunk_index], dtype=np.uint64)))


def _path_summaries(
    jump: JumpMeasure, delta: float, t: float, n_paths: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """(occupation, terminal) arrays for n_paths independent paths.

    Both functionals are symmetric under joint permutation of (time, jump)
    pairs, so jump times need no sorting here.
    """
    d = jump.model.dimension
    rate = total_rate(jump, delta) if delta < jump.model.p_max else 0.0
    occ = np.empty((n_paths, d))
    term = np.empty((n_paths, d))
    for start in range(0, n_paths, CHUNK):
        stop = min(start + CHUNK, n_paths)
        b = stop - start
        rng = _chunk_rng(seed, start // CHUNK)
        counts = rng.poisson(rate * t, size=b) if rate > 0 and t > 0 else np.zeros(b, dtype=int)
        total = int(counts.sum())
        if total == 0:
            occ[start:stop] = 0.0
            term[start:stop] = 0.0
            continue
        radii = sample_radius(jump, delta, rng.random(total))
        dirs = _sample_directions(jump, total, rng)
        times = rng.random(total) * t
        jumps = radii[:, None] * dirs
        bounds = np.concatenate([[0], np.cumsum(counts)])
        weighted = (t - times)[:, None] * jumps
        occ[start:stop] = np.add.reduceat(
            np.concatenate([weighted, np.zeros((1, d))]), bounds[:-1]
        ) * (counts > 0)[:, None]
        term[start:stop] = np.add.reduceat(
            np.concatenate([jumps, np.zeros((1, d))]), bounds[:-1]
        ) * (counts > 0)[:, None]
    return occ, term


# ---------------------------------------------------------------------------
# Field evaluation
# ---------------------------------------------------------------------------


def _bilinear_periodic(values: np.ndarray, grid: PhaseSpaceGrid, xq, kq) -> np.ndarray:
    """Bilinear interpolation with periodic wrap on both axes."""
    fx = (np.asarray(xq, dtype=float) + grid.L_x) / grid.dx
    fk = (np.asarray(kq, dtype=float) + grid.L_k) / grid.dk
    i0 = np.floor(fx).astype(np.int64)
    j0 = np.floor(fk).astype(np.int64)
    ax = fx - i0
    ak = fk - j0
    i0 %= grid.n_x
    j0 %= grid.n_k
    i1 = (i0 + 1) % grid.n_x
    j1 = (j0 + 1) % grid.n_k
    return (
        (1 - ax) * (1 - ak) * values[i0, j0]
        + ax * (1 - ak) * values[i1, j0]
        + (1 - ax) * ak * values[i0, j1]
        + ax * ak * values[i1, j1]
    )


if _HAVE_NUMBA:

    @numba.njit(parallel=True, cache=True)
    def _accumulate_field(vt, L_x, dx, L_k, dk, k_vals, t, occ, term, sign, out_sum, out_sq):
        # vt is the field transposed to (n_k, n_x) so both interpolation
        # columns are contiguous rows; the x-offset of a whole row is a
        # constant integer shift plus a constant fraction, so the inner loop
        # is two branch-free contiguous segments around the periodic seam.
        # Each output element accumulates in path order: results do not
        # depend on the worker count.
        n_k, n_x = vt.shape
        n_paths = occ.shape[0]
        for j in numba.prange(n_k):
            kj = k_vals[j]
            shift = t * kj
            col_sum = np.zeros(n_x)
            col_sq = np.zeros(n_x)
            for p in range(n_paths):
                fk = (kj + term[p] + L_k) / dk
                j0 = int(np.floor(fk))
                ak = fk - j0
                j0 = j0 % n_k
                j1 = j0 + 1
                if j1 == n_k:
                    j1 = 0
                c = sign * (shift + occ[p]) / dx
                m = int(np.floor(c))
                ax = c - m
                sh = m % n_x
                w00 = (1.0 - ax) * (1.0 - ak)
                w01 = (1.0 - ax) * ak
                w10 = ax * (1.0 - ak)
                w11 = ax * ak
                row_a = vt[j0]
                row_b = vt[j1]
                # idx = i + sh (mod n_x); segment 1: idx and idx+1 unwrapped
                n1 = n_x - sh - 1
                for i in range(n1):
                    idx = i + sh
                    v = (
                        w00 * row_a[idx]
                        + w01 * row_b[idx]
                        + w10 * row_a[idx + 1]
                        + w11 * row_b[idx + 1]
                    )
                    col_sum[i] += v
                    col_sq[i] += v * v
                if n1 >= 0:
                    v = w00 * row_a[n_x - 1] + w01 * row_b[n_x - 1] + w10 * row_a[0] + w11 * row_b[0]
                    col_sum[n1] += v
                    col_sq[n1] += v * v
                for i in range(n1 + 1, n_x):
                    idx = i + sh - n_x
                    v = (
                        w00 * row_a[idx]
                        + w01 * row_b[idx]
                        + w10 * row_a[idx + 1]
                        + w11 * row_b[idx + 1]
                    )
                    col_sum[i] += v
                    col_sq[i] += v * v
            for i in range(n_x):
                out_sum[i, j] = col_sum[i]
                out_sq[i, j] = col_sq[i]


def _wrap_fraction(grid: PhaseSpaceGrid, k_vals, t, occ, term, sign) -> float:
    """Exact fraction of (grid point, path) evaluations that left the domain.

    For a uniform periodic x-grid, a shift s throws exactly
    min(1, |s|/(2*L_x)) of the points outside the principal domain.
    Processed in path blocks to keep memory flat.
    """
    total = 0.0
    n = occ.shape[0]
    for start in range(0, n, CHUNK):
        o = occ[start : start + CHUNK]
        l = term[start : start + CHUNK]
        shift = sign * (t * k_vals[None, :] + o[:, None])
        frac_x = np.minimum(1.0, np.abs(shift) / (2.0 * grid.L_x))
        kq = k_vals[None, :] + l[:, None]
        out_k = (kq < -grid.L_k) | (kq >= grid.L_k)
        total += float(np.sum(frac_x + (1.0 - frac_x) * out_k))
    return total / (n * k_vals.size)


def estimate_field(
    w0: WignerField,
    t: float,
    jump: JumpMeasure,
    delta: float,
    n_paths: int,
    seed: int,
    time_reversed: bool = False,
) -> FieldEstimate:
    """Monte Carlo field estimate sharing every path across all grid points.

    The shared-path (common random numbers) layout makes neighboring grid
    values differ smoothly, which is what the cross-solver RMSE budgets
    assume.  ``time_reversed`` propagates along x + t*k + occupation instead;
    that orientation solves the time-reversed equation and is what the
    truncated collision series expands.
    """
    if n_paths < 2:
        raise ValueError("n_paths must be at least 2")
    if jump.model.dimension != 1:
        raise NotImplementedError("field estimation is implemented for d = 1")
    g = w0.grid
    occ, term = _path_summaries(jump, delta, t, n_paths, seed)
    occ1 = np.ascontiguousarray(occ[:, 0])
    term1 = np.ascontiguousarray(term[:, 0])
    sign = 1.0 if time_reversed else -1.0
    k_vals = g.k()
    out_sum = np.empty((g.n_x, g.n_k))
    out_sq = np.empty((g.n_x, g.n_k))
    if _HAVE_NUMBA:
        vt = np.ascontiguousarray(w0.values.T)
        _accumulate_field(
            vt, g.L_x, g.dx, g.L_k, g.dk, k_vals, t, occ1, term1, sign, out_sum, out_sq
        )
    else:
        out_sum[:] = 0.0
        out_sq[:] = 0.0
        x = g.x()[:, None]
        for p in range(n_paths):
            vals = _bilinear_periodic(
                w0.values, g, x + sign * (t * k_vals[None, :] + occ1[p]), k_vals[None, :] + term1[p]
            )
            out_sum += vals
            out_sq += vals * vals
    mean = out_sum / n_paths
    ss = np.maximum(out_sq - n_paths * mean**2, 0.0)
    # identical path values leave only cancellation residue; snap it to zero
    ss[ss < 1e-12 * out_sq] = 0.0
    stderr = np.sqrt(ss / (n_paths - 1) / n_paths)
    wrap = _wrap_fraction(g, k_vals, t, occ1, term1, sign)
    return FieldEstimate(
        field=WignerField(g, mean, w0.time_stamp + t),
        stderr=stderr,
        n_paths=n_paths,
        delta=delta,
        wrap_fraction=wrap,
    )


def estimate_point(
    w0: WignerField,
    x: float,
    k: float,
    t: float,
    jump: JumpMeasure,
    delta: float,
    n_paths: int,
    seed: int,
    time_reversed: bool = False,
) -> McEstimate:
    """Monte Carlo estimate of the solution at a single phase-space point."""
    if n_paths < 2:
        raise ValueError("n_paths must be at least 2")
    if jump.model.dimension != 1:
        raise NotImplementedError("point estimation is implemented for d = 1")
    g = w0.grid
    occ, term = _path_summaries(jump, delta, t, n_paths, seed)
    sign = 1.0 if time_reversed else -1.0
    xq = x + sign * (t * k + occ[:, 0])
    kq = k + term[:, 0]
    vals = _bilinear_periodic(w0.values, g, xq, kq)
    mean = float(vals.mean())
    # identical values (deterministic paths) must report exactly zero spread
    std = 0.0 if vals.max() == vals.min() else float(vals.std(ddof=1))
    wrap_x = np.mean((xq < -g.L_x) | (xq >= g.L_x))
    wrap_k = np.mean((kq < -g.L_k) | (kq >= g.L_k))
    return McEstimate(
        mean=mean,
        stderr=std / math.sqrt(n_paths),
        n_paths=n_paths,
        delta=delta,
        wrap_fraction=float(wrap_x + (1.0 - wrap_x) * wrap_k),
    )


def set_threads(n: int) -> None:
    """Cap the kernel's worker count; results are identical for any value."""
    if _HAVE_NUMBA:
        numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))
