import math

import numpy as np
import pytest

from dtcsim.analysis import (
    AnalysisError,
    PeakStats,
    Spectrum,
    VarianceCurve,
    bootstrap_boundary,
    central_peak,
    dft_spectrum,
    fit_variance_curve,
    lineshape,
    variance_curve,
)
from dtcsim.driver import default_epsilon_grid
from dtcsim.floquet import Trajectory


def trajectory_from_series(series):
    series = np.atleast_2d(np.asarray(series, dtype=float))
    return Trajectory(config={}, instance_index=0, instance_seed=0, series=series)


def direct_dft_amplitudes(series):
    """O(N^2) reference transform, independent of the fft-based path."""
    n = series.size
    return np.array(
        [
            abs(sum(series[m] * np.exp(-2j * math.pi * k * m / n) for m in range(n))) / n
            for k in range(n)
        ]
    )


class TestDftSpectrum:
    def test_pure_alternation_concentrates_at_half_frequency(self):
        spec = dft_spectrum(trajectory_from_series((-1.0) ** np.arange(100)))
        assert spec.amplitudes[0, 50] == pytest.approx(1.0, abs=1e-12)
        others = np.delete(spec.amplitudes[0], 50)
        assert others.max() < 1e-12

    def test_constant_series_is_pure_dc(self):
        spec = dft_spectrum(trajectory_from_series(np.ones(64)))
        assert spec.amplitudes[0, 0] == pytest.approx(1.0, abs=1e-12)
        assert spec.amplitudes[0, 1:].max() < 1e-12

    def test_beating_signal_splits_the_half_frequency_peak(self):
        n = np.arange(100)
        series = (-1.0) ** n * np.cos(0.03 * math.pi * n)
        reference = direct_dft_amplitudes(series)
        spec = dft_spectrum(trajectory_from_series(series))
        assert np.abs(spec.amplitudes[0] - reference).max() < 1e-9
        top_two = set(np.argsort(spec.amplitudes[0])[-2:])
        assert top_two == {48, 52}  # bins flanking 0.485 and 0.515 cycles/period
        assert spec.amplitudes[0, 50] < 1.0

    def test_frequency_grid(self):
        spec = dft_spectrum(trajectory_from_series(np.ones(10)))
        assert np.array_equal(spec.frequencies, np.arange(10) / 10.0)

    def test_parseval(self, rng):
        series = rng.normal(size=(3, 50))
        spec = dft_spectrum(trajectory_from_series(series))
        lhs = (spec.amplitudes**2).sum(axis=1)
        rhs = (series**2).sum(axis=1) / 50.0
        assert np.abs(lhs - rhs).max() < 1e-9

    def test_too_short_series(self):
        with pytest.raises(ValueError):
            dft_spectrum(trajectory_from_series(np.ones(1)))


class TestCentralPeak:
    def test_rigid_alternation_gives_unit_peak_zero_variance(self):
        series = np.tile((-1.0) ** np.arange(100), (4, 1))
        stats = central_peak(dft_spectrum(trajectory_from_series(series)))
        assert stats.per_site == pytest.approx(np.ones(4), abs=1e-12)
        assert stats.variance == pytest.approx(0.0, abs=1e-12)

    def test_constant_series_has_no_central_peak(self):
        stats = central_peak(dft_spectrum(trajectory_from_series(np.ones((3, 20)))))
        assert stats.per_site == pytest.approx(np.zeros(3), abs=1e-12)

    def test_two_site_arithmetic(self):
        amplitudes = np.zeros((2, 4))
        amplitudes[0, 2] = 0.2
        amplitudes[1, 2] = 0.4
        stats = central_peak(Spectrum(frequencies=np.arange(4) / 4.0, amplitudes=amplitudes))
        assert stats.mean == pytest.approx(0.3)
        assert stats.variance == pytest.approx(0.01)

    def test_odd_sample_count_rejected(self):
        spec = Spectrum(frequencies=np.arange(5) / 5.0, amplitudes=np.zeros((2, 5)))
        with pytest.raises(ValueError):
            central_peak(spec)

    def test_invariant_under_global_sign_flip(self, rng):
        series = rng.normal(size=(2, 40))
        a = central_peak(dft_spectrum(trajectory_from_series(series)))
        b = central_peak(dft_spectrum(trajectory_from_series(-series)))
        assert np.array_equal(a.per_site, b.per_site)


def peak_stats(variance):
    return PeakStats(per_site=np.zeros(2), mean=0.0, variance=variance)


class TestVarianceCurve:
    def test_identical_instances_have_zero_sem(self):
        grid = [0.01, 0.02]
        stats = {e: [peak_stats(0.05), peak_stats(0.05)] for e in grid}
        curve = variance_curve(stats, grid)
        assert np.array_equal(curve.sem, np.zeros(2))
        assert np.array_equal(curve.mean_variance, [0.05, 0.05])

    def test_two_instance_arithmetic(self):
        curve = variance_curve({0.01: [peak_stats(0.01), peak_stats(0.03)]}, [0.01])
        assert curve.mean_variance[0] == pytest.approx(0.02)
        assert curve.sem[0] == pytest.approx(0.01)

    def test_mean_invariant_under_instance_permutation(self):
        values = [0.01, 0.07, 0.03]
        a = variance_curve({0.1: [peak_stats(v) for v in values]}, [0.1])
        b = variance_curve({0.1: [peak_stats(v) for v in reversed(values)]}, [0.1])
        assert a.mean_variance[0] == b.mean_variance[0]
        assert a.sem[0] == b.sem[0]

    def test_missing_point_named_in_error(self):
        stats = {0.01: [peak_stats(0.1), peak_stats(0.2)], 0.02: [peak_stats(0.1)]}
        with pytest.raises(ValueError, match="0.02"):
            variance_curve(stats, [0.01, 0.02])

    def test_unsorted_grid_rejected(self):
        with pytest.raises(ValueError):
            variance_curve({}, [0.02, 0.01])


class TestFitVarianceCurve:
    def test_recovers_exact_synthetic_parameters(self):
        grid = default_epsilon_grid()
        y = lineshape(grid, 1.0, 0.1, 0.3, 0.05)
        curve = VarianceCurve(grid, y, np.full(grid.size, 0.01), 10)
        fit = fit_variance_curve(curve)
        assert fit.converged
        assert fit.amplitude == pytest.approx(1.0, abs=1e-6)
        assert fit.baseline == pytest.approx(0.1, abs=1e-6)
        assert fit.width == pytest.approx(0.3, abs=1e-6)
        assert fit.center == pytest.approx(0.05, abs=1e-6)

    @pytest.mark.parametrize("center", [0.006, 0.02, 0.12])
    def test_recovery_anywhere_on_the_grid(self, center):
        grid = default_epsilon_grid()
        y = lineshape(grid, 0.4, 0.02, 0.2, center)
        fit = fit_variance_curve(VarianceCurve(grid, y, np.full(grid.size, 0.005), 10))
        assert fit.converged
        assert fit.center == pytest.approx(center, abs=1e-6)

    def test_flat_data_flagged(self):
        grid = default_epsilon_grid()
        fit = fit_variance_curve(
            VarianceCurve(grid, np.full(grid.size, 0.1), np.full(grid.size, 0.01), 10)
        )
        assert not fit.converged or abs(fit.amplitude) < 1e-10

    def test_weights_follow_sem(self):
        # shrinking the error bar on one outlier point must pull the fit toward it
        grid = default_epsilon_grid()
        y = lineshape(grid, 1.0, 0.0, 0.25, 0.04)
        y[4] += 0.3
        loose = np.full(grid.size, 0.01)
        tight = loose.copy()
        tight[4] = 1e-5
        fit_loose = fit_variance_curve(VarianceCurve(grid, y, loose, 10))
        fit_tight = fit_variance_curve(VarianceCurve(grid, y, tight, 10))
        resid_loose = abs(
            lineshape(grid[4], fit_loose.amplitude, fit_loose.baseline, fit_loose.width, fit_loose.center) - y[4]
        )
        resid_tight = abs(
            lineshape(grid[4], fit_tight.amplitude, fit_tight.baseline, fit_tight.width, fit_tight.center) - y[4]
        )
        assert resid_tight < resid_loose

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            fit_variance_curve(VarianceCurve(np.array([0.01, 0.02, 0.04, 0.08]), np.zeros(4), np.zeros(4), 2))

    def test_non_positive_epsilon_rejected(self):
        grid = np.array([0.0, 0.01, 0.02, 0.04, 0.08])
        with pytest.raises(ValueError):
            fit_variance_curve(VarianceCurve(grid, np.zeros(5), np.zeros(5), 2))


def synthetic_pool(rng, pool_size=60, noise=0.002):
    grid = default_epsilon_grid()
    base = lineshape(grid, 0.04, 0.001, 0.25, 0.045)
    return grid, np.clip(base + rng.normal(0.0, noise, size=(pool_size, grid.size)), 0.0, None)


class TestBootstrapBoundary:
    def test_identical_pool_gives_zero_spread(self):
        grid = default_epsilon_grid()
        row = lineshape(grid, 0.05, 0.0, 0.3, 0.03)
        pool = np.tile(row, (12, 1))
        result = bootstrap_boundary(grid, pool, sample_size=10, repetitions=25, seed=1)
        single = fit_variance_curve(
            VarianceCurve(grid, row, np.zeros(grid.size), 10)
        )
        assert result.std == 0.0
        assert result.mean == single.center
        assert result.failures == 0

    def test_single_repetition_is_degenerate(self, rng):
        grid, pool = synthetic_pool(rng)
        result = bootstrap_boundary(grid, pool, sample_size=10, repetitions=1, seed=2)
        assert result.degenerate
        assert result.std == 0.0

    def test_deterministic_in_seed(self, rng):
        grid, pool = synthetic_pool(rng)
        a = bootstrap_boundary(grid, pool, sample_size=8, repetitions=20, seed=9)
        b = bootstrap_boundary(grid, pool, sample_size=8, repetitions=20, seed=9)
        assert a == b

    def test_spread_reflects_pool_noise(self, rng):
        grid, pool = synthetic_pool(rng)
        result = bootstrap_boundary(grid, pool, sample_size=10, repetitions=60, seed=3)
        assert result.failures == 0
        assert result.mean == pytest.approx(0.045, abs=0.01)
        assert 0.0 < result.std < 0.02

    def test_with_replacement_mode(self, rng):
        grid, pool = synthetic_pool(rng)
        result = bootstrap_boundary(
            grid, pool, sample_size=10, repetitions=20, seed=4, with_replacement=True
        )
        assert result.failures == 0

    def test_excess_failures_raise(self):
        grid = default_epsilon_grid()
        pool = np.full((12, grid.size), 0.1)  # flat curves cannot be fit
        with pytest.raises(AnalysisError):
            bootstrap_boundary(grid, pool, sample_size=10, repetitions=10, seed=5)

    def test_pool_smaller_than_sample_rejected(self, rng):
        grid, pool = synthetic_pool(rng, pool_size=5)
        with pytest.raises(ValueError):
            bootstrap_boundary(grid, pool, sample_size=10, repetitions=5, seed=6)
