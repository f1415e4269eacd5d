"""Command-line interface: simulate, sweep, fit-boundary, bootstrap, modes, bb1."""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import bootstrap_boundary, central_peak, dft_spectrum, fit_variance_curve
from .driver import (
    SweepConfig,
    default_epsilon_grid,
    generate_variance_pool,
    load_variance_curves,
    run_sweep,
    write_csv,
    write_spectrum_csv,
    write_trajectory_csv,
)
from .floquet import FloquetConfig, run_trajectory, sample_disorder
from .ionchain import coupling_from_modes, equilibrium_positions, fit_power_law, transverse_modes
from .pulses import RabiErrorModel, bb1_sequence, compose_pulses, rotation_infidelity, rotation_matrix

ALPHA_REFERENCE = 1.51


def _cmd_simulate(args) -> int:
    config = FloquetConfig(
        sites=args.sites,
        epsilon=args.epsilon,
        periods=args.periods,
        j0t2=args.j0t2,
        alpha=args.alpha,
        wt3=args.wt3,
        pulse_model=args.pulse_model,
    )
    instance = sample_disorder(args.sites, args.wt3, args.seed)
    trajectory = run_trajectory(config, instance)
    spectrum = dft_spectrum(trajectory)
    out = Path(args.out)
    write_trajectory_csv(out / "trajectory.csv", trajectory)
    write_spectrum_csv(out / "spectrum.csv", spectrum, config.period_seconds, args.sites)
    stats = central_peak(spectrum)
    peak_bins = np.argmax(spectrum.amplitudes, axis=1)
    print(f"wrote {out / 'trajectory.csv'} and {out / 'spectrum.csv'}")
    print(f"central-bin amplitude: mean {stats.mean:.4f}, site variance {stats.variance:.6f}")
    print(f"per-site spectral-maximum bins: {peak_bins.tolist()} (half-frequency bin = {args.periods // 2})")
    return 0


def _cmd_sweep(args) -> int:
    config = SweepConfig.from_json_file(args.config) if args.config else SweepConfig()
    if args.threads is not None:
        config.threads = args.threads
    if args.out is not None:
        config.output_dir = args.out
    store = run_sweep(config)
    print(f"sweep complete: {len(store.peak_stats)} trajectories -> {store.output_dir}")
    for j0t2, fit in store.fits.items():
        print(f"  j0t2={j0t2}: eps_p={fit.center:.4f} converged={fit.converged}")
    if store.errors:
        print(f"  {len(store.errors)} aggregation errors recorded in the manifest")
        return 1
    return 0


def _cmd_fit_boundary(args) -> int:
    curves = load_variance_curves(args.store)
    if not curves:
        print("no variance curves found in store", file=sys.stderr)
        return 1
    rows = []
    for j0t2 in sorted(curves):
        fit = fit_variance_curve(curves[j0t2])
        rows.append([j0t2, fit.center, fit.amplitude, fit.baseline, fit.width,
                     fit.objective, fit.converged, fit.iterations])
        print(f"j0t2={j0t2}: eps_p={fit.center:.4f} gamma={fit.width:.4f} "
              f"converged={fit.converged}")
    out = Path(args.out or args.store)
    write_csv(
        out / "boundary.csv",
        ["j0t2", "eps_p", "amplitude", "baseline", "width", "objective", "converged", "iterations"],
        rows,
    )
    print(f"wrote {out / 'boundary.csv'}")
    return 0


def _cmd_bootstrap(args) -> int:
    grid = default_epsilon_grid()
    pool = generate_variance_pool(
        sites=args.sites,
        periods=args.periods,
        j0t2=args.j0t2,
        epsilons=grid,
        pool_size=args.pool_size,
        master_seed=args.seed,
        wt3=args.wt3,
        threads=args.threads,
    )
    result = bootstrap_boundary(
        grid,
        pool,
        sample_size=args.sample_size,
        repetitions=args.reps,
        seed=args.seed,
        with_replacement=args.with_replacement,
    )
    out = Path(args.out)
    write_csv(
        out / "bootstrap.csv",
        ["j0t2", "mean_eps_p", "std_eps_p", "repetitions", "sample_size", "failures"],
        [[args.j0t2, result.mean, result.std, result.repetitions,
          result.sample_size, result.failures]],
    )
    print(f"bootstrap over {result.repetitions} repetitions "
          f"({result.failures} failed fits): "
          f"eps_p = {result.mean:.4f} +/- {result.std:.4f}")
    print(f"wrote {out / 'bootstrap.csv'}")
    return 0


def _cmd_modes(args) -> int:
    geometry = equilibrium_positions(args.sites)
    modes = transverse_modes(geometry, args.anisotropy)
    profile = coupling_from_modes(modes, args.mu)
    alpha, j0, residual = fit_power_law(profile)
    out = Path(args.out)
    write_csv(out / "positions.csv", ["ion", "position"],
              ([i, u] for i, u in enumerate(geometry.positions)))
    write_csv(
        out / "modes.csv",
        ["mode", "frequency"] + [f"b_{i}" for i in range(args.sites)],
        ([m, modes.frequencies[m], *modes.vectors[:, m]] for m in range(args.sites)),
    )
    write_csv(
        out / "couplings.csv",
        ["i", "j", "coupling"],
        ([i, j, profile.matrix[i, j]]
         for i in range(args.sites) for j in range(i + 1, args.sites)),
    )
    write_csv(out / "alpha.csv", ["alpha", "j0", "rms_log_residual", "reference"],
              [[alpha, j0, residual, ALPHA_REFERENCE]])
    print(f"ion positions span [{geometry.positions[0]:.4f}, {geometry.positions[-1]:.4f}]")
    print(f"mode frequencies: {np.round(modes.frequencies, 4).tolist()}")
    print(f"fitted power-law exponent: {alpha:.4f} "
          f"(reference {ALPHA_REFERENCE}, advisory window +/- 0.3)")
    print(f"wrote positions/modes/couplings/alpha tables to {out}")
    return 0


def _cmd_bb1(args) -> int:
    deltas = [float(d) for d in args.delta_grid.split(",") if d.strip()]
    if not deltas:
        print("empty delta grid", file=sys.stderr)
        return 1
    target = rotation_matrix(0.5 * math.pi, math.pi * (1.0 - args.epsilon))
    plain_pulse = bb1_sequence(args.epsilon)[:1]
    composite = bb1_sequence(args.epsilon)
    rows = []
    print("delta      plain infidelity    bb1 infidelity      suppression")
    for delta in deltas:
        error = RabiErrorModel(delta_static=delta, sigma_noise=args.noise_rms)
        plain = rotation_infidelity(compose_pulses(plain_pulse, error), target)
        robust = rotation_infidelity(compose_pulses(composite, error), target)
        ratio = plain / robust if robust > 0.0 else math.inf
        rows.append([delta, plain, robust, ratio])
        print(f"{delta:<10.4g} {plain:<19.6e} {robust:<19.6e} {ratio:.1f}x")
    if len(deltas) >= 2:
        lg_d = np.log(deltas)
        plain_slope = np.polyfit(lg_d, np.log([r[1] for r in rows]), 1)[0]
        bb1_slope = np.polyfit(lg_d, np.log([r[2] for r in rows]), 1)[0]
        print(f"log-log slope: plain {plain_slope:.2f}, composite {bb1_slope:.2f}")
    if args.out:
        write_csv(Path(args.out) / "bb1_report.csv",
                  ["delta", "plain_infidelity", "bb1_infidelity", "suppression"], rows)
        print(f"wrote {Path(args.out) / 'bb1_report.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtcsim",
        description="Driven disordered spin-chain simulator and sub-harmonic analysis",
    )
    parser.add_argument("--version", action="version", version=f"dtcsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one trajectory and write its spectrum")
    p.add_argument("--sites", type=int, default=10)
    p.add_argument("--periods", type=int, default=100)
    p.add_argument("--epsilon", type=float, default=0.03)
    p.add_argument("--j0t2", type=float, default=0.036)
    p.add_argument("--alpha", type=float, default=1.51)
    p.add_argument("--wt3", type=float, default=math.pi)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--pulse-model", choices=("ideal", "bb1"), default="ideal")
    p.add_argument("--out", default="simulate-out")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="full phase-diagram sweep from a JSON config")
    p.add_argument("--config", help="JSON file with SweepConfig fields (defaults used if omitted)")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("fit-boundary", help="fit variance curves from a sweep store")
    p.add_argument("--store", required=True, help="sweep output directory")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_fit_boundary)

    p = sub.add_parser("bootstrap", help="resample a disorder pool and refit the boundary")
    p.add_argument("--pool-size", type=int, default=100)
    p.add_argument("--sample-size", type=int, default=10)
    p.add_argument("--reps", type=int, default=10000)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--sites", type=int, default=10)
    p.add_argument("--periods", type=int, default=100)
    p.add_argument("--j0t2", type=float, default=0.036)
    p.add_argument("--wt3", type=float, default=math.pi)
    p.add_argument("--with-replacement", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default="bootstrap-out")
    p.set_defaults(func=_cmd_bootstrap)

    p = sub.add_parser("modes", help="trap chain positions, transverse modes, couplings")
    p.add_argument("--sites", type=int, default=10)
    p.add_argument("--anisotropy", type=float, required=True,
                   help="transverse/axial trap frequency ratio")
    p.add_argument("--mu", type=float, required=True,
                   help="drive detuning in units of the axial frequency")
    p.add_argument("--out", default="modes-out")
    p.set_defaults(func=_cmd_modes)

    p = sub.add_parser("bb1", help="composite-pulse error-suppression report")
    p.add_argument("--delta-grid", default="0.002,0.004,0.008,0.016",
                   help="comma-separated fractional amplitude errors")
    p.add_argument("--noise-rms", type=float, default=0.0)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_bb1)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
