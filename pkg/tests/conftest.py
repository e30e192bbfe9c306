import numpy as np
import pytest

from modular_ppt.linalg import BipartiteShape


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=20240915))


@pytest.fixture
def shape22():
    return BipartiteShape(2, 2)


@pytest.fixture
def singlet():
    psi = np.zeros(4, dtype=complex)
    psi[1], psi[2] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    return np.outer(psi, psi.conj())


@pytest.fixture
def phi_plus():
    psi = np.zeros(4, dtype=complex)
    psi[0], psi[3] = 1 / np.sqrt(2), 1 / np.sqrt(2)
    return np.outer(psi, psi.conj())


@pytest.fixture
def swap22():
    m = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            m[i * 2 + j, j * 2 + i] = 1.0
    return m
