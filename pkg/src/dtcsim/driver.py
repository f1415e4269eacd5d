"""Sweep orchestration, deterministic seeding, and plot-ready persistence.

A sweep runs one trajectory per (coupling phase, epsilon, disorder instance)
cell, reusing the same disorder instances across every cell so curves at
different couplings are directly comparable.  Instance seeds are split off
the master seed by index only, so any single record can be regenerated in
isolation from the manifest.  Numeric tables are CSV with full round-trip
precision; the manifest is JSON.
"""

from __future__ import annotations

import csv
import datetime
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .analysis import (
    FitResult,
    PeakStats,
    VarianceCurve,
    central_peak,
    dft_spectrum,
    fit_variance_curve,
    variance_curve,
)
from .floquet import FloquetConfig, Trajectory, instance_seed, run_trajectory, sample_disorder

THREADS_ENV_VAR = "DTCSIM_THREADS"

DEFAULT_J0T2_LADDER = (0.006, 0.012, 0.024, 0.036)
DEFAULT_EPSILON_RANGE = (0.005, 0.15)
DEFAULT_EPSILON_POINTS = 16


def default_epsilon_grid(
    points: int = DEFAULT_EPSILON_POINTS,
    low: float = DEFAULT_EPSILON_RANGE[0],
    high: float = DEFAULT_EPSILON_RANGE[1],
) -> np.ndarray:
    """Logarithmically spaced perturbation grid used by the phase-diagram sweep."""
    return np.geomspace(low, high, points)


@dataclass
class SweepConfig:
    sites: int = 10
    periods: int = 100
    epsilons: Sequence[float] = field(default_factory=lambda: tuple(default_epsilon_grid()))
    j0t2_values: Sequence[float] = field(default_factory=lambda: DEFAULT_J0T2_LADDER)
    instances: int = 10
    master_seed: int = 12345
    alpha: float = 1.51
    wt3: float = math.pi
    pulse_model: str = "ideal"
    threads: int = 1
    output_dir: str = "sweep-out"
    period_seconds: float = 75e-6
    write_series: bool = True  # per-trajectory CSV emission

    def __post_init__(self):
        self.epsilons = tuple(float(e) for e in self.epsilons)
        self.j0t2_values = tuple(float(j) for j in self.j0t2_values)
        if self.instances < 1:
            raise ValueError("instances must be >= 1")
        if not self.epsilons or not self.j0t2_values:
            raise ValueError("epsilon grid and j0t2 list must be non-empty")
        if any(e <= 0.0 for e in self.epsilons):
            raise ValueError("sweep epsilons must be > 0 (the fit works in log epsilon)")
        if list(self.epsilons) != sorted(self.epsilons):
            raise ValueError("epsilon grid must be increasing")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SweepConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown sweep config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json_file(cls, path: str | Path) -> "SweepConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def as_dict(self) -> dict[str, Any]:
        return {
            "sites": self.sites,
            "periods": self.periods,
            "epsilons": list(self.epsilons),
            "j0t2_values": list(self.j0t2_values),
            "instances": self.instances,
            "master_seed": self.master_seed,
            "alpha": self.alpha,
            "wt3": self.wt3,
            "pulse_model": self.pulse_model,
            "threads": self.threads,
            "output_dir": str(self.output_dir),
            "period_seconds": self.period_seconds,
            "write_series": self.write_series,
        }


@dataclass
class ResultStore:
    """In-memory results of a sweep plus the directory they were persisted to."""

    output_dir: Path
    manifest: dict[str, Any]
    curves: dict[float, VarianceCurve]
    fits: dict[float, FitResult]
    peak_stats: dict[tuple[int, int, int], PeakStats]
    errors: dict[tuple[int, int, int], str]


def _fmt(value) -> str:
    """Shortest round-trip formatting for CSV cells."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def thread_budget(requested: int) -> int:
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        return max(1, int(env))
    return max(1, requested)


def _site_header(sites: int) -> list[str]:
    return [f"site_{i}" for i in range(sites)]


def write_trajectory_csv(path: Path, trajectory: Trajectory) -> None:
    header = ["period"] + _site_header(trajectory.sites)
    rows = (
        [n, *trajectory.series[:, n]] for n in range(trajectory.periods)
    )
    write_csv(path, header, rows)


def write_spectrum_csv(path: Path, spectrum, period_seconds: float, sites: int) -> None:
    # frequency in cycles/period and in kHz via the configured period duration
    header = ["freq_cycles_per_period", "freq_khz"] + _site_header(sites)
    khz = spectrum.frequencies / period_seconds / 1e3
    rows = (
        [spectrum.frequencies[k], khz[k], *spectrum.amplitudes[:, k]]
        for k in range(spectrum.frequencies.size)
    )
    write_csv(path, header, rows)


def _trajectory_config(cfg: SweepConfig, j0t2: float, eps: float) -> FloquetConfig:
    return FloquetConfig(
        sites=cfg.sites,
        epsilon=eps,
        periods=cfg.periods,
        j0t2=j0t2,
        alpha=cfg.alpha,
        wt3=cfg.wt3,
        pulse_model=cfg.pulse_model,
        period_seconds=cfg.period_seconds,
    )


def run_sweep(config: SweepConfig) -> ResultStore:
    """Run the full (j0t2 x epsilon x instance) grid and persist every product.

    The same ``config.instances`` disorder realizations (seeded by master seed
    and instance index only) are reused across all epsilons and couplings.
    Results are keyed, and aggregation iterates keys in order, so outputs are
    identical for any thread budget.
    """
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.datetime.now(datetime.timezone.utc).isoformat()

    disorder = [
        sample_disorder(config.sites, config.wt3, instance_seed(config.master_seed, k), k)
        for k in range(config.instances)
    ]

    tasks = [
        (ji, ei, k)
        for ji in range(len(config.j0t2_values))
        for ei in range(len(config.epsilons))
        for k in range(config.instances)
    ]

    peak_stats: dict[tuple[int, int, int], PeakStats] = {}
    errors: dict[tuple[int, int, int], str] = {}

    def run_cell(key):
        ji, ei, k = key
        traj_config = _trajectory_config(
            config, config.j0t2_values[ji], config.epsilons[ei]
        )
        trajectory = run_trajectory(traj_config, disorder[k])
        spectrum = dft_spectrum(trajectory)
        if config.write_series:
            stem = f"J{ji}_E{ei:02d}_I{k:02d}"
            write_trajectory_csv(out / "trajectories" / f"traj_{stem}.csv", trajectory)
            write_spectrum_csv(
                out / "spectra" / f"spec_{stem}.csv",
                spectrum,
                config.period_seconds,
                config.sites,
            )
        return key, central_peak(spectrum)

    workers = thread_budget(config.threads)
    curves: dict[float, VarianceCurve] = {}
    fits: dict[float, FitResult] = {}
    try:
        if workers == 1:
            for key, stats in map(run_cell, tasks):
                peak_stats[key] = stats
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for key, stats in pool.map(run_cell, tasks):
                    peak_stats[key] = stats

        for ji, j0t2 in enumerate(config.j0t2_values):
            stats_by_eps = {
                eps: [peak_stats[(ji, ei, k)] for k in range(config.instances)
                      if (ji, ei, k) in peak_stats]
                for ei, eps in enumerate(config.epsilons)
            }
            try:
                curves[j0t2] = variance_curve(stats_by_eps, config.epsilons, label=j0t2)
                fits[j0t2] = fit_variance_curve(curves[j0t2])
            except ValueError as exc:
                errors[(ji, -1, -1)] = str(exc)

        _persist_aggregates(out, config, peak_stats, curves, fits)
    except Exception as exc:  # noqa: BLE001 - mark the store partial, then re-raise
        try:
            _write_manifest(out, config, disorder, started, "partial", {"fatal": str(exc)})
        except OSError:
            pass
        raise
    manifest = _write_manifest(
        out, config, disorder, started, "complete",
        {f"{k}": v for k, v in errors.items()} if errors else None,
    )
    return ResultStore(
        output_dir=out,
        manifest=manifest,
        curves=curves,
        fits=fits,
        peak_stats=peak_stats,
        errors=errors,
    )


def _persist_aggregates(out: Path, config: SweepConfig, peak_stats, curves, fits) -> None:
    write_csv(
        out / "peak_stats.csv",
        ["j0t2", "epsilon", "instance", "mean_amplitude", "site_variance"],
        (
            [
                config.j0t2_values[ji],
                config.epsilons[ei],
                k,
                stats.mean,
                stats.variance,
            ]
            for (ji, ei, k), stats in sorted(peak_stats.items())
        ),
    )
    write_csv(
        out / "variance_curves.csv",
        ["j0t2", "epsilon", "mean_site_variance", "sem", "instances"],
        (
            [curve.label, curve.epsilons[i], curve.mean_variance[i], curve.sem[i], curve.instances]
            for curve in curves.values()
            for i in range(curve.epsilons.size)
        ),
    )
    write_csv(
        out / "fits.csv",
        ["j0t2", "amplitude", "baseline", "width", "center", "objective", "converged", "iterations"],
        (
            [j, f.amplitude, f.baseline, f.width, f.center, f.objective, f.converged, f.iterations]
            for j, f in fits.items()
        ),
    )
    write_csv(
        out / "boundary.csv",
        ["j0t2", "eps_p", "converged"],
        ([j, f.center, f.converged] for j, f in fits.items()),
    )


def _write_manifest(out, config, disorder, started, status, errors=None) -> dict[str, Any]:
    manifest = {
        "tool": "dtcsim",
        "version": __version__,
        "status": status,
        "started_utc": started,
        "finished_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": config.as_dict(),
        "instances": [{"index": d.index, "seed": int(d.seed)} for d in disorder],
    }
    if errors:
        manifest["errors"] = errors
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest


def load_variance_curves(store_dir: str | Path) -> dict[float, VarianceCurve]:
    """Rebuild the per-coupling variance curves from a persisted sweep."""
    path = Path(store_dir) / "variance_curves.csv"
    rows: dict[float, list[tuple[float, float, float, int]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for record in csv.DictReader(fh):
            rows.setdefault(float(record["j0t2"]), []).append(
                (
                    float(record["epsilon"]),
                    float(record["mean_site_variance"]),
                    float(record["sem"]),
                    int(record["instances"]),
                )
            )
    curves = {}
    for j0t2, points in rows.items():
        points.sort()
        eps, mean, sem, counts = zip(*points)
        curves[j0t2] = VarianceCurve(
            epsilons=np.array(eps),
            mean_variance=np.array(mean),
            sem=np.array(sem),
            instances=counts[0],
            label=j0t2,
        )
    return curves


def generate_variance_pool(
    sites: int,
    periods: int,
    j0t2: float,
    epsilons: Sequence[float],
    pool_size: int,
    master_seed: int,
    alpha: float = 1.51,
    wt3: float = math.pi,
    threads: int = 1,
) -> np.ndarray:
    """Per-instance cross-site variance curves for bootstrap resampling.

    Returns an array of shape (pool_size, len(epsilons)).
    """
    grid = [float(e) for e in epsilons]
    disorder = [
        sample_disorder(sites, wt3, instance_seed(master_seed, k), k)
        for k in range(pool_size)
    ]

    def one_instance(k: int) -> np.ndarray:
        row = np.empty(len(grid))
        for ei, eps in enumerate(grid):
            cfg = FloquetConfig(
                sites=sites, epsilon=eps, periods=periods,
                j0t2=j0t2, alpha=alpha, wt3=wt3,
            )
            stats = central_peak(dft_spectrum(run_trajectory(cfg, disorder[k])))
            row[ei] = stats.variance
        return row

    workers = thread_budget(threads)
    if workers == 1:
        rows = [one_instance(k) for k in range(pool_size)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one_instance, range(pool_size)))
    return np.vstack(rows)
