"""Linear-trap ion chain: equilibrium positions, transverse modes, couplings.

Positions are dimensionless, in units of the Coulomb length scale
(e^2 / (4 pi eps0 M omega_z^2))^(1/3); mode frequencies are in units of the
axial frequency omega_z.  The spin-spin coupling profile mediated by the
transverse modes is produced only up to its positive overall scale, which is
why profiles are normalized to a unit maximum nearest-neighbour entry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_CHAIN = 50
FORCE_TOL = 1e-10
NEWTON_MAX_ITER = 200
MODE_GAP_TOL = 1e-6


class ChainUnstableError(RuntimeError):
    """Transverse confinement too weak for a stable linear chain."""


class NumericalFailureError(RuntimeError):
    """An iterative solve failed to converge."""


@dataclass(frozen=True)
class ChainGeometry:
    """Dimensionless equilibrium positions, strictly increasing, centred on 0."""

    sites: int
    positions: np.ndarray


@dataclass(frozen=True)
class ModeData:
    """Transverse normal modes: frequencies descending, orthonormal columns.

    Column m of ``vectors`` is the mode with frequency ``frequencies[m]``;
    the first column is the centre-of-mass mode (uniform, frequency equal to
    the trap anisotropy).
    """

    frequencies: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class CouplingProfile:
    """Pairwise couplings normalized to max |nearest neighbour| = 1.

    ``alpha``/``residual`` hold the power-law fit of the profile when the
    chain has at least 4 ions, else None.
    """

    matrix: np.ndarray
    alpha: float | None
    residual: float | None


def _net_force(u: np.ndarray) -> np.ndarray:
    """Trap force plus inter-ion Coulomb repulsion at positions u (zero at equilibrium)."""
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    coulomb = np.sign(diff) / diff**2
    return u - coulomb.sum(axis=1)


def _force_jacobian(u: np.ndarray) -> np.ndarray:
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    inv3 = 1.0 / np.abs(diff) ** 3
    jac = -2.0 * inv3
    np.fill_diagonal(jac, 1.0 + 2.0 * inv3.sum(axis=1))
    return jac


def equilibrium_positions(sites: int) -> ChainGeometry:
    """Newton-solve the force balance from an evenly spaced initial guess.

    Parameters
    ----------
    sites : int
        Number of ions, 2 <= sites <= 50.

    Returns
    -------
    ChainGeometry
        Positions with per-ion force residual below ``FORCE_TOL``.

    Raises
    ------
    NumericalFailureError
        If the damped Newton iteration has not converged after 200 steps.
    """
    if not 2 <= sites <= MAX_CHAIN:
        raise ValueError(f"sites must be in [2, {MAX_CHAIN}], got {sites}")
    spacing = 2.018 / sites**0.559  # standard minimum-gap scaling for the guess
    u = spacing * (np.arange(sites) - 0.5 * (sites - 1))
    residual = np.abs(_net_force(u)).max()
    for _ in range(NEWTON_MAX_ITER):
        if residual < FORCE_TOL:
            return ChainGeometry(sites=sites, positions=u)
        step = np.linalg.solve(_force_jacobian(u), _net_force(u))
        scale = 1.0
        for _ in range(60):  # damp on residual increase
            trial = u - scale * step
            trial_res = np.abs(_net_force(trial)).max()
            if trial_res < residual or scale < 1e-12:
                break
            scale *= 0.5
        u, residual = trial, trial_res
    raise NumericalFailureError(
        f"equilibrium solve did not converge for {sites} ions (residual {residual:.3e})"
    )


def transverse_modes(geometry: ChainGeometry, anisotropy: float) -> ModeData:
    """Diagonalize the transverse stiffness matrix.

    Parameters
    ----------
    geometry : ChainGeometry
        Equilibrium positions.
    anisotropy : float
        Transverse-to-axial trap frequency ratio omega_t / omega_z.

    Raises
    ------
    ChainUnstableError
        If any squared frequency is non-positive (zigzag threshold crossed).
    """
    u = geometry.positions
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    inv3 = 1.0 / np.abs(diff) ** 3
    a = inv3.copy()
    np.fill_diagonal(a, anisotropy**2 - inv3.sum(axis=1))
    evals, evecs = np.linalg.eigh(a)
    if evals[0] <= 0.0:
        raise ChainUnstableError(
            f"chain unstable at anisotropy {anisotropy}: squared frequency {evals[0]:.3e}"
        )
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    # fix the eigh sign ambiguity: make each column's largest entry positive
    for m in range(geometry.sites):
        col = evecs[:, m]
        if col[np.argmax(np.abs(col))] < 0.0:
            evecs[:, m] = -col
    return ModeData(frequencies=np.sqrt(evals), vectors=evecs)


def coupling_from_modes(modes: ModeData, mu: float) -> CouplingProfile:
    """Mode-mediated couplings J_ij ~ sum_m b_im b_jm / (mu^2 - omega_m^2), normalized.

    Raises ValueError if mu sits within ``MODE_GAP_TOL`` of a mode frequency,
    or if the profile is degenerate (all nearest-neighbour couplings
    negligible, as happens for mu far above the spectrum).
    """
    freqs, b = modes.frequencies, modes.vectors
    gap = np.abs(mu - freqs).min()
    if gap < MODE_GAP_TOL:
        raise ValueError(f"detuning mu={mu} is resonant with a mode (gap {gap:.2e})")
    weights = 1.0 / (mu**2 - freqs**2)
    raw = (b * weights) @ b.T
    self_scale = np.abs(np.diagonal(raw)).max()
    np.fill_diagonal(raw, 0.0)
    raw = 0.5 * (raw + raw.T)  # exact symmetry
    nn_max = np.abs(np.diagonal(raw, offset=1)).max()
    if nn_max <= 1e-9 * self_scale:
        raise ValueError(
            "degenerate coupling profile: nearest-neighbour couplings vanish "
            f"(max {nn_max:.3e} against self-scale {self_scale:.3e})"
        )
    matrix = raw / nn_max
    alpha = residual = None
    if matrix.shape[0] >= 4:
        alpha, _, residual = fit_power_law(matrix)
    return CouplingProfile(matrix=matrix, alpha=alpha, residual=residual)


def fit_power_law(profile) -> tuple[float, float, float]:
    """Least-squares fit |J_ij| ~ j0 / |i-j|**alpha over all pairs.

    Parameters
    ----------
    profile : CouplingProfile or array
        Coupling matrix; zero entries are excluded from the fit.

    Returns
    -------
    (alpha, j0, residual) : tuple of float
        Exponent, prefactor, and RMS residual of log|J| about the fit.
    """
    matrix = profile.matrix if isinstance(profile, CouplingProfile) else np.asarray(profile)
    sites = matrix.shape[0]
    if sites < 4:
        raise ValueError("power-law fit needs at least 4 sites")
    i, j = np.triu_indices(sites, k=1)
    values = np.abs(matrix[i, j])
    keep = values > 0.0
    if not np.any(keep):
        raise ValueError("all couplings are zero; nothing to fit")
    x = np.log(j - i)[keep]
    y = np.log(values[keep])
    slope, intercept = np.polyfit(x, y, 1)
    rms = float(np.sqrt(np.mean((slope * x + intercept - y) ** 2)))
    return float(-slope), float(np.exp(intercept)), rms
