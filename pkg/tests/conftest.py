import numpy as np
import pytest

from wigner_dfe import SystemSpec


@pytest.fixture(scope="session")
def spec3():
    return SystemSpec(3, 1)


@pytest.fixture(scope="session")
def spec32():
    return SystemSpec(3, 2)


@pytest.fixture(scope="session")
def spec5():
    return SystemSpec(5, 1)


@pytest.fixture(scope="session")
def spec7():
    return SystemSpec(7, 1)


def rand_state(rng, D):
    psi = rng.normal(size=D) + 1j * rng.normal(size=D)
    return psi / np.linalg.norm(psi)


def rand_unitary(rng, D):
    M = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
    Q, R = np.linalg.qr(M)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def rand_density(rng, D, rank=None):
    rank = rank or D
    G = rng.normal(size=(D, rank)) + 1j * rng.normal(size=(D, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def rand_kraus_channel(rng, D, m=3):
    """Random CPTP map: isometry columns split into m Kraus blocks."""
    M = rng.normal(size=(m * D, D)) + 1j * rng.normal(size=(m * D, D))
    Q, _ = np.linalg.qr(M)
    return tuple(Q[i * D : (i + 1) * D, :] for i in range(m))
