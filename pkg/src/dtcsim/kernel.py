"""Matrix-free pure-state kernel for a spin chain in the sigma^x eigenbasis.

Basis convention: a basis state is labelled by an integer whose bit i holds
the sigma_i^x eigenvalue of site i (bit 0 <-> +1, bit 1 <-> -1); site 0 is
the lowest-order bit.  In this basis the Ising and random-field pieces of
the drive are pure diagonal phases, a drive rotation touches one bit at a
time, and measuring sigma_i^x is a probability sum split by bit value.

A dense brute-force path (`dense_oracle` plus the `dense_single_site`
builder) is provided for verification at small sizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_SITES = 24
ORACLE_MAX_SITES = 6

NORM_TOL = 1e-10
UNITARY_TOL = 1e-12

# Pauli operators in the sigma^x eigenbasis, row/column order (+1, -1).
SIGMA_X = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, 1.0j], [-1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


@dataclass(eq=False)
class StateVector:
    """Pure state of ``sites`` spins: 2**sites complex amplitudes.

    Invariants enforced on construction: the amplitude count is exactly
    2**sites and the norm is 1 within ``NORM_TOL``.
    """

    sites: int
    amplitudes: np.ndarray

    basis = "sigma_x"  # bit i = 0 <-> sigma_i^x = +1, bit i = 1 <-> -1

    def __post_init__(self):
        if not 1 <= self.sites <= MAX_SITES:
            raise ValueError(f"sites must be in [1, {MAX_SITES}], got {self.sites}")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.sites,):
            raise ValueError(
                f"expected {1 << self.sites} amplitudes for {self.sites} sites, "
                f"got shape {self.amplitudes.shape}"
            )
        err = abs(self.norm() - 1.0)
        if err > NORM_TOL:
            raise ValueError(f"state norm deviates from 1 by {err:.3e}")

    def norm(self) -> float:
        return float(np.sqrt(np.real(np.vdot(self.amplitudes, self.amplitudes))))

    def copy(self) -> "StateVector":
        return StateVector(self.sites, self.amplitudes.copy())


@dataclass(frozen=True)
class DiagonalPhaseSpec:
    """Phases of a diagonal unitary exp(-i [sum_{i<j} phi_ij s_i s_j + sum_i d_i s_i]).

    ``pair_phases`` must be symmetric with zero diagonal; ``site_phases`` has
    one entry per site.  s_i = +/-1 is the sigma_i^x eigenvalue of a basis
    state.
    """

    pair_phases: np.ndarray
    site_phases: np.ndarray

    def __post_init__(self):
        pair = np.asarray(self.pair_phases, dtype=float)
        site = np.asarray(self.site_phases, dtype=float)
        n = site.shape[0] if site.ndim == 1 else -1
        if site.ndim != 1 or pair.shape != (n, n):
            raise ValueError("pair_phases must be LxL and site_phases length L")
        if not np.array_equal(pair, pair.T):
            raise ValueError("pair_phases must be symmetric")
        if np.any(np.diagonal(pair) != 0.0):
            raise ValueError("pair_phases must have zero diagonal")
        object.__setattr__(self, "pair_phases", pair)
        object.__setattr__(self, "site_phases", site)

    @property
    def sites(self) -> int:
        return self.site_phases.shape[0]


def _bit_signs(sites: int, site: int) -> np.ndarray:
    """Per-basis-state sign s_site = +1 (bit 0) or -1 (bit 1), as int8."""
    block = np.repeat(np.array([1, -1], dtype=np.int8), 1 << site)
    return np.tile(block, 1 << (sites - site - 1))


def init_product_state(sites: int) -> StateVector:
    """All spins pointing along -x: amplitude 1 on the all-bits-set index."""
    if not 1 <= sites <= MAX_SITES:
        raise ValueError(f"sites must be in [1, {MAX_SITES}], got {sites}")
    amps = np.zeros(1 << sites, dtype=complex)
    amps[-1] = 1.0
    return StateVector(sites, amps)


def _check_unitary_2x2(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {u.shape}")
    dev = np.abs(u.conj().T @ u - np.eye(2)).max()
    if dev > UNITARY_TOL:
        raise ValueError(f"matrix is not unitary (deviation {dev:.3e})")
    return u


def _apply_single_qubit_inplace(amps: np.ndarray, site: int, u: np.ndarray) -> None:
    # View as (high bits, target bit, low bits); the target axis has stride 2**site.
    view = amps.reshape(-1, 2, 1 << site)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
    view[:, 1, :] = u[1, 0] * a0 + u[1, 1] * a1


def apply_single_qubit(state: StateVector, site: int, u: np.ndarray) -> StateVector:
    """Apply a 2x2 unitary to one site, identity elsewhere.

    Raises ValueError if the site is out of range or ``u`` is not unitary
    within ``UNITARY_TOL``.
    """
    if not 0 <= site < state.sites:
        raise ValueError(f"site {site} out of range for {state.sites} sites")
    u = _check_unitary_2x2(u)
    out = state.amplitudes.copy()
    _apply_single_qubit_inplace(out, site, u)
    return StateVector(state.sites, out)


def diagonal_phase_table(spec: DiagonalPhaseSpec) -> np.ndarray:
    """Total phase per basis state: sum_{i<j} phi_ij s_i s_j + sum_i d_i s_i.

    O(2**L * L**2); callers evolving many periods should compute this once
    and reuse the resulting table.
    """
    sites = spec.sites
    total = np.zeros(1 << sites)
    for i in range(sites):
        si = _bit_signs(sites, i).astype(float)
        di = spec.site_phases[i]
        if di != 0.0:
            total += di * si
        for j in range(i + 1, sites):
            phi = spec.pair_phases[i, j]
            if phi != 0.0:
                total += phi * si * _bit_signs(sites, j)
    return total


def apply_diagonal_phase(state: StateVector, spec: DiagonalPhaseSpec) -> StateVector:
    """Multiply each amplitude by exp(-i * total phase); magnitudes unchanged."""
    if spec.sites != state.sites:
        raise ValueError(
            f"phase spec is for {spec.sites} sites, state has {state.sites}"
        )
    factors = np.exp(-1j * diagonal_phase_table(spec))
    return StateVector(state.sites, state.amplitudes * factors)


def measure_sigma_x(state: StateVector) -> np.ndarray:
    """Expectation <sigma_i^x> for every site, each in [-1, 1]."""
    probs = np.abs(state.amplitudes) ** 2
    out = np.empty(state.sites)
    for i in range(state.sites):
        p_minus = probs.reshape(-1, 2, 1 << i)[:, 1, :].sum()
        out[i] = 1.0 - 2.0 * p_minus
    return out


def dense_single_site(sites: int, site: int, u: np.ndarray) -> np.ndarray:
    """Kronecker embedding of a 2x2 operator at one site (site 0 = lowest bit)."""
    if not 0 <= site < sites:
        raise ValueError(f"site {site} out of range for {sites} sites")
    op = np.eye(1, dtype=complex)
    for k in range(sites - 1, -1, -1):
        factor = np.asarray(u, dtype=complex) if k == site else np.eye(2, dtype=complex)
        op = np.kron(op, factor)
    return op


def dense_oracle(sites: int, operators) -> StateVector:
    """Brute-force reference: apply full 2**L x 2**L unitaries, in order, to
    the -x product state.  Refused above ORACLE_MAX_SITES (resource guard)."""
    if sites > ORACLE_MAX_SITES:
        raise ValueError(
            f"dense oracle refused for sites={sites} (limit {ORACLE_MAX_SITES})"
        )
    vec = init_product_state(sites).amplitudes
    for op in operators:
        op = np.asarray(op, dtype=complex)
        if op.shape != (1 << sites, 1 << sites):
            raise ValueError(f"operator shape {op.shape} does not match {sites} sites")
        vec = op @ vec
    return StateVector(sites, vec)
