import numpy as np
import pytest

from disentangle.codes import bit_flip_code, five_qubit_code
from disentangle.linalg import StateVector


@pytest.fixture(scope="session")
def five_qubit():
    return five_qubit_code()


@pytest.fixture(scope="session")
def bit_flip():
    return bit_flip_code()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def bell():
    return StateVector.from_amplitudes(np.array([1, 0, 0, 1]) / np.sqrt(2))


@pytest.fixture
def plus():
    return StateVector.qubit(1 / np.sqrt(2), 1 / np.sqrt(2))
