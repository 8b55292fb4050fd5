import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from swapsim.core import StateVector


def random_state(rng: np.random.Generator, num_qubits: int) -> StateVector:
    v = rng.normal(size=1 << num_qubits) + 1j * rng.normal(size=1 << num_qubits)
    return StateVector.normalized(v)


def random_unit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


_finite = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False, allow_infinity=False)


def complex_vectors(size: int):
    """Hypothesis strategy for non-negligible complex vectors of a fixed length."""
    return st.tuples(arrays(np.float64, size, elements=_finite), arrays(np.float64, size, elements=_finite)).map(
        lambda ri: ri[0] + 1j * ri[1]
    ).filter(lambda v: np.linalg.norm(v) > 1e-3)


def states(num_qubits: int):
    return complex_vectors(1 << num_qubits).map(StateVector.normalized)


@pytest.fixture
def rng():
    return np.random.default_rng(20260101)
