"""Simulator and analysis pipeline for sub-harmonic response of a driven,
disordered, long-range Ising spin chain.

Subpackages: state-vector kernel (`kernel`), composite pulses (`pulses`),
the periodic drive (`floquet`), trap normal modes (`ionchain`), spectral
statistics and fits (`analysis`), and sweep orchestration (`driver`).
"""

__version__ = "0.1.0"

from .kernel import (
    DiagonalPhaseSpec,
    StateVector,
    apply_diagonal_phase,
    apply_single_qubit,
    dense_oracle,
    dense_single_site,
    init_product_state,
    measure_sigma_x,
)
from .pulses import (
    Pulse,
    RabiErrorModel,
    bb1_sequence,
    compose_pulses,
    composite_u3_check,
    rotation_infidelity,
    rotation_matrix,
)
from .floquet import (
    DisorderInstance,
    FloquetConfig,
    Trajectory,
    apply_floquet_period,
    build_power_law_couplings,
    instance_seed,
    run_trajectory,
    sample_disorder,
)
from .ionchain import (
    ChainGeometry,
    ChainUnstableError,
    CouplingProfile,
    ModeData,
    coupling_from_modes,
    equilibrium_positions,
    fit_power_law,
    transverse_modes,
)
from .analysis import (
    AnalysisError,
    BootstrapResult,
    FitResult,
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
from .driver import (
    ResultStore,
    SweepConfig,
    default_epsilon_grid,
    generate_variance_pool,
    load_variance_curves,
    run_sweep,
)

__all__ = [
    "__version__",
    "DiagonalPhaseSpec", "StateVector", "apply_diagonal_phase", "apply_single_qubit",
    "dense_oracle", "dense_single_site", "init_product_state", "measure_sigma_x",
    "Pulse", "RabiErrorModel", "bb1_sequence", "compose_pulses",
    "composite_u3_check", "rotation_infidelity", "rotation_matrix",
    "DisorderInstance", "FloquetConfig", "Trajectory", "apply_floquet_period",
    "build_power_law_couplings", "instance_seed", "run_trajectory", "sample_disorder",
    "ChainGeometry", "ChainUnstableError", "CouplingProfile", "ModeData",
    "coupling_from_modes", "equilibrium_positions", "fit_power_law", "transverse_modes",
    "AnalysisError", "BootstrapResult", "FitResult", "PeakStats", "Spectrum",
    "VarianceCurve", "bootstrap_boundary", "central_peak", "dft_spectrum",
    "fit_variance_curve", "lineshape", "variance_curve",
    "ResultStore", "SweepConfig", "default_epsilon_grid", "generate_variance_pool",
    "load_variance_curves", "run_sweep",
]
