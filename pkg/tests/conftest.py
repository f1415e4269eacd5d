"""Shared test helpers: dense matrix-exponential reference for the drive period."""

import math

import numpy as np
import pytest
from scipy.linalg import expm

from dtcsim.kernel import SIGMA_X, SIGMA_Y, dense_single_site


def dense_period_operators(config, instance):
    """Full-matrix unitaries for one drive period, built independently of the kernel.

    Returns [rotation, diagonal] in application order, each from an explicit
    matrix exponential of the summed generator.
    """
    size = config.sites
    flip = sum(dense_single_site(size, i, SIGMA_Y) for i in range(size))
    u_flip = expm(-1j * (math.pi * (1.0 - config.epsilon) / 2.0) * flip)
    couplings = config.coupling_phases()
    diag = np.zeros((1 << size, 1 << size), dtype=complex)
    for i in range(size):
        diag += instance.phases[i] * dense_single_site(size, i, SIGMA_X)
        for j in range(i + 1, size):
            diag += couplings[i, j] * (
                dense_single_site(size, i, SIGMA_X) @ dense_single_site(size, j, SIGMA_X)
            )
    return [u_flip, expm(-1j * diag)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
