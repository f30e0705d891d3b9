"""Jump-process sampling and the Monte Carlo field estimator."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrkinetic import fourier as fr
from lrkinetic import montecarlo as mc
from lrkinetic import phasespace as ps
from lrkinetic import spectrum as sp


@pytest.fixture(scope="module")
def mc_rng():
    return np.random.default_rng(991)


def test_radial_sampler_ks_distance(jump, mc_rng):
    delta = 0.01
    radii = mc.sample_radius(jump, delta, mc_rng.random(100000))
    knots, cum = mc._radial_cdf_table(jump, delta)
    cdf = np.interp(np.sort(radii), knots, cum / cum[-1])
    ks = np.max(np.abs(cdf - np.arange(1, radii.size + 1) / radii.size))
    assert ks < 0.01
    assert radii.min() > delta and radii.max() < jump.model.p_max


def test_sample_jump_symmetry_and_support(jump, mc_rng):
    draws = np.array([mc.sample_jump(jump, 0.05, mc_rng)[0] for _ in range(4000)])
    assert np.all((np.abs(draws) > 0.05) & (np.abs(draws) < 1.0))
    stderr = draws.std(ddof=1) / math.sqrt(draws.size)
    assert abs(draws.mean()) < 3 * stderr


def test_sample_path_statistics(jump, mc_rng):
    delta, t = 0.05, 2.0
    rate = mc.total_rate(jump, delta)
    paths = [mc.sample_path(jump, delta, t, mc_rng) for _ in range(4000)]
    counts = np.array([p.jumps.shape[0] for p in paths])
    count_se = counts.std(ddof=1) / math.sqrt(counts.size)
    assert abs(counts.mean() - rate * t) < 3 * count_se
    # Var L_t = t * int |p|^2 d(sigma) on the truncated support
    terminal = np.array([p.terminal()[0] for p in paths])
    second = sp.measure_integral(sp.truncated(jump, delta), lambda p: p[:, 0] ** 2, refine=4)
    var_se = terminal.var(ddof=1) * math.sqrt(2.0 / (terminal.size - 1))
    mean_se = terminal.std(ddof=1) / math.sqrt(terminal.size)
    assert abs(terminal.mean()) < 3 * mean_se
    assert abs(terminal.var(ddof=1) - t * second) < 3 * var_se


def test_sample_path_empty_at_t_zero(jump, mc_rng):
    path = mc.sample_path(jump, 0.1, 0.0, mc_rng)
    assert path.jump_times.size == 0
    assert np.array_equal(mc.occupation_integral(path), np.zeros(1))


def test_occupation_explicit_cases(jump):
    one = mc.LevyPath(np.array([0.75]), np.array([[2.0]]), 2.0)
    assert mc.occupation_integral(one)[0] == pytest.approx(2.0 * (2.0 - 0.75), rel=1e-15)
    two = mc.LevyPath(np.array([0.5, 1.25]), np.array([[1.0], [-3.0]]), 2.0)
    expected = 1.0 * (1.25 - 0.5) + (1.0 - 3.0) * (2.0 - 1.25)
    assert mc.occupation_integral(two)[0] == pytest.approx(expected, rel=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_occupation_matches_piecewise_sum(data):
    # independent route: accumulate L segment by segment between jumps
    n = data.draw(st.integers(min_value=0, max_value=6))
    horizon = data.draw(st.floats(min_value=0.5, max_value=3.0))
    times = sorted(
        data.draw(
            st.lists(
                st.floats(min_value=1e-6, max_value=0.999), min_size=n, max_size=n, unique=True
            )
        )
    )
    jumps = data.draw(
        st.lists(st.floats(min_value=-2, max_value=2), min_size=n, max_size=n)
    )
    path = mc.LevyPath(np.array(times) * horizon, np.array(jumps).reshape(-1, 1), horizon)
    level = 0.0
    acc = 0.0
    knots = list(path.jump_times) + [horizon]
    prev = 0.0
    for i, tk in enumerate(knots):
        acc += level * (tk - prev)
        prev = tk
        if i < len(path.jumps):
            level += path.jumps[i, 0]
    assert mc.occupation_integral(path)[0] == pytest.approx(acc, rel=1e-12, abs=1e-12)


def test_occupation_against_riemann(jump, mc_rng):
    path = mc.sample_path(jump, 0.05, 2.0, mc_rng)
    tgrid = np.linspace(0.0, 2.0, 400001)
    level = np.zeros_like(tgrid)
    for tau, jp in zip(path.jump_times, path.jumps):
        level[tgrid >= tau] += jp[0]
    riemann = np.trapezoid(level, tgrid)
    # the Riemann route carries O(dt) error from the jump discontinuities
    assert mc.occupation_integral(path)[0] == pytest.approx(riemann, abs=5e-5)


def test_estimate_point_deterministic_cases(w0, jump):
    pt = mc.estimate_point(w0, 0.3, -0.4, 0.0, jump, 0.05, 100, seed=5)
    direct = float(mc._bilinear_periodic(w0.values, w0.grid, np.array([0.3]), np.array([-0.4]))[0])
    assert pt.mean == pytest.approx(direct, rel=1e-14)
    assert pt.stderr == 0.0
    j0 = sp.jump_measure(sp.SpectrumModel(a0=0.0))
    pt0 = mc.estimate_point(w0, 0.3, -0.4, 1.0, j0, 0.05, 100, seed=5)
    free = float(
        mc._bilinear_periodic(w0.values, w0.grid, np.array([0.3 - 1.0 * -0.4]), np.array([-0.4]))[0]
    )
    assert pt0.mean == pytest.approx(free, rel=1e-14)
    assert pt0.stderr == 0.0


def test_estimate_field_zero_amplitude_is_free_transport(w0):
    j0 = sp.jump_measure(sp.SpectrumModel(a0=0.0))
    est = mc.estimate_field(w0, 1.0, j0, 0.05, 50, seed=3)
    free = fr.free_transport(w0, 1.0)
    # bilinear evaluation at exactly grid-aligned shifts is exact only up to
    # the interpolation of the off-grid shear t*k
    assert np.max(np.abs(est.field.values - free.values)) < 2e-3
    assert np.all(est.stderr == 0.0)


def test_estimate_field_matches_fourier(w0, jump):
    est = mc.estimate_field(w0, 1.0, jump, 0.01, 30000, seed=12)
    ref = fr.solve_fourier(w0, jump, 1.0)
    sup = float(np.max(np.abs(w0.values)))
    rmse = math.sqrt(float(np.mean((est.field.values - ref.values) ** 2)))
    assert rmse < 0.015 * sup


def test_stderr_scaling_with_path_count(w0, jump):
    ref = fr.solve_fourier(w0, jump, 1.0)
    core = np.abs(ref.values) > 0.1 * np.max(np.abs(ref.values))
    full = mc.estimate_field(w0, 1.0, jump, 0.02, 8000, seed=5)
    half = mc.estimate_field(w0, 1.0, jump, 0.02, 4000, seed=5)
    ratio = float(np.median(half.stderr[core]) / np.median(full.stderr[core]))
    assert 1.2 <= ratio <= 1.7


def test_determinism_same_seed_bitwise(w0, jump):
    a = mc.estimate_field(w0, 0.7, jump, 0.02, 3000, seed=42)
    b = mc.estimate_field(w0, 0.7, jump, 0.02, 3000, seed=42)
    assert np.array_equal(a.field.values, b.field.values)
    assert np.array_equal(a.stderr, b.stderr)
    c = mc.estimate_field(w0, 0.7, jump, 0.02, 3000, seed=43)
    assert not np.array_equal(a.field.values, c.field.values)


def test_determinism_across_worker_counts(w0, jump):
    mc.set_threads(1)
    one = mc.estimate_field(w0, 0.7, jump, 0.02, 3000, seed=9)
    mc.set_threads(2)
    two = mc.estimate_field(w0, 0.7, jump, 0.02, 3000, seed=9)
    assert np.array_equal(one.field.values, two.field.values)
    assert np.array_equal(one.stderr, two.stderr)


def test_truncation_bias_vanishes_deterministically(grid, jump):
    # E[estimator at delta] solves the truncated equation exactly, so the
    # truncation bias is the deterministic gap between exponents
    q = np.linspace(0.25, 8.0, 32)
    full = sp.psi_batch(jump, q)
    gaps = []
    for delta in (0.04, 0.02, 0.01):
        trunc = sp.psi_batch(sp.truncated(jump, delta), q)
        gaps.append(np.max(np.abs(trunc - full)))
    assert gaps[0] > gaps[1] > gaps[2]


def test_truncation_bias_ladder_monte_carlo(w0, jump):
    # at large deltas the bias clears the sampling noise at moderate n
    ref = fr.solve_fourier(w0, jump, 1.0)
    core = np.abs(ref.values) > 0.1 * np.max(np.abs(ref.values))
    meds = []
    for delta in (0.4, 0.2, 0.05):
        est = mc.estimate_field(w0, 1.0, jump, delta, 30000, seed=21)
        meds.append(float(np.median(np.abs(est.field.values - ref.values)[core])))
    assert meds[0] > meds[1] > meds[2]


def test_reversed_flow_mirror_identity(w0, jump):
    # for x-even data the reversed flow equals the forward flow mirrored in x
    fwd = mc.estimate_field(w0, 0.8, jump, 0.05, 2000, seed=31)
    rev = mc.estimate_field(w0, 0.8, jump, 0.05, 2000, seed=31, time_reversed=True)
    mirrored = np.roll(fwd.field.values[::-1, :], 1, axis=0)  # x -> -x on the periodic grid
    assert np.max(np.abs(rev.field.values - mirrored)) < 1e-12
