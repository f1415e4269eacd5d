"""Spectra, sub-harmonic peak statistics, cross-over fits, and bootstrap.

The cross-over between the rigid sub-harmonic response and the symmetry
unbroken regime shows up as a peak in the cross-site variance of the
half-frequency spectral amplitude.  Its location eps_p is extracted by a
weighted fit of a Lorentzian-in-log10 lineshape

    F(eps) = A / (1 + (log10(eps / eps_p) / gamma)**2) + B

and the finite-disorder-sampling error of eps_p is estimated by resampling
instances from a larger pool.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from .floquet import Trajectory

SEM_FLOOR = 1e-6
FIT_MAX_EVALS = 10_000
FIT_XATOL = 1e-10


class AnalysisError(RuntimeError):
    """An analysis step produced unusable results (e.g. too many fit failures)."""


@dataclass(frozen=True)
class Spectrum:
    """Per-site DFT amplitudes on the frequency grid k / N (cycles per period)."""

    frequencies: np.ndarray
    amplitudes: np.ndarray  # shape (sites, N)


@dataclass(frozen=True)
class PeakStats:
    """Half-frequency amplitude per site, with cross-site mean and population variance."""

    per_site: np.ndarray
    mean: float
    variance: float


@dataclass(frozen=True)
class VarianceCurve:
    """Instance-averaged cross-site variance of the central peak, per epsilon."""

    epsilons: np.ndarray
    mean_variance: np.ndarray
    sem: np.ndarray
    instances: int
    label: float | None = None  # coupling phase this curve belongs to


@dataclass(frozen=True)
class FitResult:
    amplitude: float        # A
    baseline: float         # B
    width: float            # gamma
    center: float           # eps_p
    objective: float
    converged: bool
    iterations: int


@dataclass(frozen=True)
class BootstrapResult:
    mean: float
    std: float
    repetitions: int
    sample_size: int
    failures: int
    degenerate: bool = False


def dft_spectrum(trajectory: Trajectory) -> Spectrum:
    """Plain DFT of each site's correlator series, S(k/N) = (1/N) sum_n C(n) e^{-2pi i k n / N}.

    No windowing, no zero padding; amplitudes are moduli.
    """
    series = trajectory.series
    n = series.shape[1]
    if n < 2:
        raise ValueError("need at least 2 samples for a spectrum")
    amps = np.abs(np.fft.fft(series, axis=1)) / n
    return Spectrum(frequencies=np.arange(n) / n, amplitudes=amps)


def central_peak(spectrum: Spectrum) -> PeakStats:
    """Amplitude of the half-frequency bin per site; N must be even so the bin exists."""
    n = spectrum.frequencies.shape[0]
    if n % 2 != 0:
        raise ValueError(f"central bin requires an even sample count, got {n}")
    per_site = spectrum.amplitudes[:, n // 2].copy()
    return PeakStats(
        per_site=per_site,
        mean=float(per_site.mean()),
        variance=float(per_site.var()),  # population variance over the sites
    )


def variance_curve(
    stats: Mapping[float, Sequence[PeakStats]],
    grid: Sequence[float],
    label: float | None = None,
) -> VarianceCurve:
    """Average the per-instance site-variance over instances at every grid point.

    ``stats`` maps each epsilon to that point's per-instance PeakStats; every
    grid point needs at least 2 instances.  The quoted error is the standard
    error of the mean over instances.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(np.diff(grid) <= 0.0):
        raise ValueError("epsilon grid must be non-empty and strictly increasing")
    mean = np.empty(grid.size)
    sem = np.empty(grid.size)
    counts = set()
    for k, eps in enumerate(grid):
        if eps not in stats or len(stats[eps]) < 2:
            raise ValueError(f"missing data: need >= 2 instances at epsilon={eps}")
        v = np.array([ps.variance for ps in stats[eps]])
        counts.add(v.size)
        mean[k] = v.mean()
        sem[k] = v.std(ddof=1) / math.sqrt(v.size)
    return VarianceCurve(
        epsilons=grid, mean_variance=mean, sem=sem, instances=max(counts), label=label
    )


def lineshape(eps, amplitude, baseline, width, center):
    """The Lorentzian-in-log10 cross-over lineshape F(eps)."""
    x = (np.log10(eps) - math.log10(center)) / width
    return amplitude / (1.0 + x * x) + baseline


def _profiled_sse(lg, y, w, width, center):
    """Weighted SSE with (A, B) solved exactly for fixed (width, center)."""
    x = (lg - math.log10(center)) / width
    f = 1.0 / (1.0 + x * x)
    s_ff = np.dot(w, f * f)
    s_f = np.dot(w, f)
    s_1 = w.sum()
    s_fy = np.dot(w * f, y)
    s_y = np.dot(w, y)
    det = s_ff * s_1 - s_f * s_f
    if det <= 0.0:
        return np.inf, 0.0, 0.0
    a = (s_fy * s_1 - s_f * s_y) / det
    b = (s_ff * s_y - s_f * s_fy) / det
    r = a * f + b - y
    return float(np.dot(w * r, r)), a, b


def fit_variance_curve(curve: VarianceCurve) -> FitResult:
    """Weighted lineshape fit with multi-start simplex refinement.

    Every grid point seeds a candidate center; each candidate is refined by
    Nelder-Mead on (width, log10 center) with the linear parameters (A, B)
    profiled out, and the best candidate gets a final full-parameter polish.
    Weights are 1/sem^2 with sems floored at ``SEM_FLOOR``.
    """
    eps = np.asarray(curve.epsilons, dtype=float)
    if eps.size < 5:
        raise ValueError("lineshape fit needs at least 5 grid points")
    if np.any(eps <= 0.0):
        raise ValueError("all epsilon values must be positive")
    y = np.asarray(curve.mean_variance, dtype=float)
    w = 1.0 / np.maximum(np.asarray(curve.sem, dtype=float), SEM_FLOOR) ** 2
    lg = np.log10(eps)

    def profiled_objective(q):
        width = q[0]
        if width == 0.0:
            return np.inf
        return _profiled_sse(lg, y, w, width, 10.0 ** q[1])[0]

    width0 = 0.25 * (lg[-1] - lg[0])
    evals = 0
    best = None
    for center0 in eps:
        res = minimize(
            profiled_objective,
            x0=[width0, math.log10(center0)],
            method="Nelder-Mead",
            options={"xatol": 1e-7, "fatol": 1e-11, "maxfev": 2000},
        )
        evals += res.nfev
        if best is None or res.fun < best.fun:
            best = res

    width_b = abs(best.x[0])
    center_b = 10.0 ** best.x[1]
    _, a_b, b_b = _profiled_sse(lg, y, w, width_b, center_b)

    def objective(p):
        a, b, width, center = p
        if center <= 0.0 or width == 0.0:
            return np.inf
        x = (lg - math.log10(center)) / width
        r = a / (1.0 + x * x) + b - y
        return float(np.dot(w * r, r))

    # fatol must sit above the objective's floating-point plateau or the
    # simplex-diameter criterion can never be declared met
    polish = minimize(
        objective,
        x0=[a_b, b_b, width_b, center_b],
        method="Nelder-Mead",
        options={"xatol": FIT_XATOL, "fatol": 1e-11, "maxfev": FIT_MAX_EVALS},
    )
    evals += polish.nfev
    a, b, width, center = polish.x
    width = abs(width)
    flat = abs(a) < 1e-12 * max(1.0, abs(b))
    converged = bool(polish.success) and eps[0] <= center <= eps[-1] and not flat
    return FitResult(
        amplitude=float(a),
        baseline=float(b),
        width=float(width),
        center=float(center),
        objective=float(polish.fun),
        converged=converged,
        iterations=evals,
    )


def bootstrap_boundary(
    epsilons: Sequence[float],
    instance_variances: np.ndarray,
    sample_size: int = 10,
    repetitions: int = 10_000,
    seed: int = 0,
    with_replacement: bool = False,
) -> BootstrapResult:
    """Resample disorder instances, refit the cross-over center each time.

    ``instance_variances`` is the pool: one row per instance, one column per
    grid point, each entry that instance's cross-site peak variance.  Each
    repetition draws ``sample_size`` rows (without replacement by default),
    averages them into a curve, and fits the lineshape; failed fits are
    counted, not imputed.  More than 20% failures raises AnalysisError.
    """
    pool = np.asarray(instance_variances, dtype=float)
    grid = np.asarray(epsilons, dtype=float)
    if pool.ndim != 2 or pool.shape[1] != grid.size:
        raise ValueError("instance_variances must be (pool size, grid size)")
    if pool.shape[0] < sample_size:
        raise ValueError(
            f"pool of {pool.shape[0]} instances is smaller than sample size {sample_size}"
        )
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    centers = []
    failures = 0
    for rep in range(repetitions):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(rep,)))
        rows = rng.choice(pool.shape[0], size=sample_size, replace=with_replacement)
        sub = pool[rows]
        curve = VarianceCurve(
            epsilons=grid,
            mean_variance=sub.mean(axis=0),
            sem=sub.std(axis=0, ddof=1) / math.sqrt(sample_size),
            instances=sample_size,
        )
        fit = fit_variance_curve(curve)
        if fit.converged:
            centers.append(fit.center)
        else:
            failures += 1
    if failures > 0.2 * repetitions:
        raise AnalysisError(
            f"{failures} of {repetitions} bootstrap fits failed (> 20%)"
        )
    centers = np.asarray(centers)
    degenerate = centers.size < 2
    return BootstrapResult(
        mean=float(centers.mean()) if centers.size else math.nan,
        std=float(centers.std(ddof=1)) if not degenerate else 0.0,
        repetitions=repetitions,
        sample_size=sample_size,
        failures=failures,
        degenerate=degenerate,
    )
