import numpy as np
import pytest

from phmor import PHDAESystem


@pytest.fixture
def index1_fixture():
    """2x2 semi-explicit index-1 system with H(s) = (s + 4) / (s + 1)."""
    return PHDAESystem(
        E=np.diag([1.0, 0.0]),
        J=np.array([[0.0, 1.0], [-1.0, 0.0]]),
        R=np.diag([0.0, 1.0]),
        B=np.array([[2.0], [1.0]]),
        P=np.zeros((2, 1)),
        S=np.zeros((1, 1)),
        N=np.zeros((1, 1)),
    )


@pytest.fixture
def index2_fixture():
    """3x3 semi-explicit index-2 system with H(s) = 1 / (s + 1)."""
    J = np.zeros((3, 3))
    J[1, 2], J[2, 1] = 1.0, -1.0
    return PHDAESystem(
        E=np.diag([1.0, 1.0, 0.0]),
        J=J,
        R=np.diag([1.0, 1.0, 0.0]),
        B=np.array([[1.0], [-0.5], [0.0]]),
        P=np.zeros((3, 1)),
        S=np.zeros((1, 1)),
        N=np.zeros((1, 1)),
    )
