"""Shared helpers: independent oracles used across test modules."""

import numpy as np
import pytest


def crandn(rng, *shape):
    """Circularly-symmetric complex Gaussian with unit variance per entry."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def dft_matrix(n, unitary=True):
    """Explicitly constructed DFT matrix; independent of any FFT routine."""
    grid = np.outer(np.arange(n), np.arange(n))
    mat = np.exp(-2j * np.pi * grid / n)
    return mat / np.sqrt(n) if unitary else mat


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
