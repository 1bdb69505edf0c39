"""Shared fixtures: period matrices and multiplier systems used across tests."""

from __future__ import annotations

import numpy as np
import pytest

from thetaops.multipliers import jordan_example, trivial_system
from thetaops.riemann import RiemannMatrix

# fixed generic period matrices; small real parts, well-conditioned Im part
OMEGA1 = [[1j]]
OMEGA1_B = [[0.3 + 1.1j]]
OMEGA2 = [
    [0.25 + 1.00j, 0.15 + 0.35j],
    [0.15 + 0.35j, -0.20 + 1.15j],
]
OMEGA3 = [
    [0.20 + 1.00j, 0.10 + 0.30j, -0.05 + 0.15j],
    [0.10 + 0.30j, -0.15 + 1.10j, 0.12 + 0.20j],
    [-0.05 + 0.15j, 0.12 + 0.20j, 0.25 + 0.95j],
]


@pytest.fixture(scope="session")
def omega1():
    return RiemannMatrix(OMEGA1)


@pytest.fixture(scope="session")
def omega1b():
    return RiemannMatrix(OMEGA1_B)


@pytest.fixture(scope="session")
def omega2():
    return RiemannMatrix(OMEGA2)


@pytest.fixture(scope="session")
def omega3():
    return RiemannMatrix(OMEGA3)


@pytest.fixture(scope="session")
def jordan22():
    """Rank-2 nondiagonalizable system on g=2, degree 1: A_2 = 1/2 + A_1."""
    return jordan_example(2, 2, [[0.5, 1.0]])


@pytest.fixture(scope="session")
def jordan22_s2():
    return jordan_example(2, 2, [[0.5, 1.0]], s=2)


@pytest.fixture(scope="session")
def scalar_sys2():
    return trivial_system(2, 1)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
