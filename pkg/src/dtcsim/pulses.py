"""Composite single-spin pulses and Rabi amplitude-error models.

All 2x2 matrices use the sigma^x-eigenbasis representation from
:mod:`dtcsim.kernel`, so composites feed straight into the chain kernel.
Rotation axes live in the x-y plane of the Bloch sphere, measured from +x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .kernel import SIGMA_X, SIGMA_Y, SIGMA_Z, _check_unitary_2x2

TWO_PI = 2.0 * math.pi

# Compensation axis of the four-pulse broadband sequence for a pi rotation.
BB1_AXIS = math.acos(-0.25)


@dataclass(frozen=True)
class Pulse:
    """One rotation: axis at ``axis_angle`` from +x (x-y plane), by ``rotation_angle``."""

    axis_angle: float
    rotation_angle: float

    def __post_init__(self):
        if not math.isfinite(self.rotation_angle):
            raise ValueError("rotation_angle must be finite")
        object.__setattr__(self, "axis_angle", self.axis_angle % TWO_PI)


@dataclass(frozen=True)
class RabiErrorModel:
    """Fractional Rabi-amplitude error: static per-site offset plus per-pulse noise.

    Every pulse's rotation angle is multiplied by (1 + delta), where delta is
    the site's static offset plus, if ``sigma_noise`` > 0, a fresh Gaussian
    draw per pulse seeded by (noise_seed, site).
    """

    delta_static: float | np.ndarray = 0.0
    sigma_noise: float = 0.0
    noise_seed: int | tuple = 0

    def __post_init__(self):
        if np.max(np.abs(self.delta_static)) >= 0.2:
            raise ValueError("|delta_static| must be < 0.2")
        if self.sigma_noise < 0.0:
            raise ValueError("sigma_noise must be >= 0")

    def static_for(self, site: int) -> float:
        if np.ndim(self.delta_static) == 0:
            return float(self.delta_static)
        return float(np.asarray(self.delta_static)[site])


def rotation_matrix(axis_angle: float, rotation_angle: float) -> np.ndarray:
    """exp(-i (phi/2) (cos(theta) sigma^x + sin(theta) sigma^y)) in the x basis."""
    c = math.cos(0.5 * rotation_angle)
    s = math.sin(0.5 * rotation_angle)
    ax, ay = math.cos(axis_angle), math.sin(axis_angle)
    return np.array(
        [[c - 1j * s * ax, s * ay], [-s * ay, c + 1j * s * ax]], dtype=complex
    )


def bb1_sequence(epsilon: float) -> list[Pulse]:
    """Four-pulse broadband composite for the perturbed global flip.

    Application order: the perturbed pi(1 - epsilon) rotation about y, then
    the compensation block pi / 2pi / pi about axes at (theta_B, 3 theta_B,
    theta_B) from the base rotation axis, theta_B = arccos(-1/4).  The block
    is the identity for a perfect amplitude and cancels a common fractional
    angle error to second order; the compensation axes must be referenced to
    the base axis for that cancellation to hold.
    """
    if not 0.0 <= epsilon < 0.5:
        raise ValueError(f"epsilon must be in [0, 0.5), got {epsilon}")
    base_axis = 0.5 * math.pi  # the flip is about y
    return [
        Pulse(base_axis, math.pi * (1.0 - epsilon)),
        Pulse(base_axis + BB1_AXIS, math.pi),
        Pulse(base_axis + 3.0 * BB1_AXIS, TWO_PI),
        Pulse(base_axis + BB1_AXIS, math.pi),
    ]


def compose_pulses(
    pulses: Sequence[Pulse],
    error: RabiErrorModel | None = None,
    site: int = 0,
) -> np.ndarray:
    """Product of the pulses in application order, with amplitude errors applied.

    Returns the 2x2 unitary (first pulse rightmost in the matrix product).
    """
    draws = None
    delta0 = 0.0
    if error is not None:
        delta0 = error.static_for(site)
        if error.sigma_noise > 0.0:
            seq = np.random.SeedSequence(error.noise_seed, spawn_key=(site,))
            rng = np.random.default_rng(seq)
            draws = rng.normal(0.0, error.sigma_noise, size=len(pulses))
    u = np.eye(2, dtype=complex)
    for n, pulse in enumerate(pulses):
        delta = delta0 + (draws[n] if draws is not None else 0.0)
        u = rotation_matrix(pulse.axis_angle, pulse.rotation_angle * (1.0 + delta)) @ u
    return u


def rotation_infidelity(u: np.ndarray, v: np.ndarray) -> float:
    """1 - |tr(u^dag v)| / 2, a global-phase-blind distance in [0, 1]."""
    u = _check_unitary_2x2(u)
    v = _check_unitary_2x2(v)
    return 1.0 - 0.5 * abs(np.trace(u.conj().T @ v))


def composite_u3_check(d: float) -> float:
    """Deviation of the pi/2-sandwiched z-axis phase from a direct x-axis phase.

    Applies, in order, exp(+i pi/4 sigma^y), exp(-i d sigma^z),
    exp(-i pi/4 sigma^y) and compares the product entrywise against
    exp(-i d sigma^x).  The identity is exact; the return value is
    floating-point noise (contract: < 1e-12 for any finite d).
    """
    if not math.isfinite(d):
        raise ValueError("d must be finite")
    first = expm(0.25j * math.pi * SIGMA_Y)
    middle = expm(-1j * d * SIGMA_Z)
    last = expm(-0.25j * math.pi * SIGMA_Y)
    product = last @ middle @ first
    target = expm(-1j * d * SIGMA_X)
    return float(np.abs(product - target).max())
