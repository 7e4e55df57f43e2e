import numpy as np
import pytest

from qpercept.operators import Operator, State, haar_random_unitary


def random_state(rng: np.random.Generator, dim: int) -> State:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return State(rho / np.trace(rho).real)


def random_hermitian(rng: np.random.Generator, dim: int) -> Operator:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return Operator((g + g.conj().T) / 2)


def random_projector(rng: np.random.Generator, dim: int, rank: int) -> Operator:
    u = haar_random_unitary(dim, int(rng.integers(0, 2**31))).mat
    block = u[:, :rank]
    return Operator(block @ block.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240801)
