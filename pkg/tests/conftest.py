import math

import numpy as np
import pytest

from mlab import (
    ProductHamiltonianSpec,
    basis_readout,
    cnot_partial,
    computational_readout,
    from_product_hamiltonian,
)

ACCEPTANCE_LINES = []

H = 1 / math.sqrt(2)
PLUS = np.array([H, H])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def qubit_product(theta):
    return from_product_hamiltonian(ProductHamiltonianSpec((1, -1), (1, -1), PLUS, theta))


@pytest.fixture
def plus_state():
    return PLUS.copy()


@pytest.fixture
def y_readout():
    return basis_readout(np.array([[1, 1j], [1, -1j]]) / math.sqrt(2), "y")


@pytest.fixture
def z_readout():
    return computational_readout(2, "z")


@pytest.fixture
def steering_qubit():
    return qubit_product(math.pi / 8)


@pytest.fixture
def cnot_quarter():
    return cnot_partial(math.pi / 4)
