import numpy as np
import pytest

from divark.linalg import random_unitary
from divark.realization import Colligation


def neil_colligation() -> Colligation:
    """5x5 permutation colligation realizing the cusp curve w^3 = z^2.

    Blocks (m=3, n=2): the transfer function works out to the companion
    matrix [[0, 0, z^2], [1, 0, 0], [0, 1, 0]] whose characteristic
    polynomial is w^3 - z^2.
    """
    u = np.zeros((5, 5), dtype=np.complex128)
    a = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=np.complex128)
    b = np.array([[1, 0], [0, 0], [0, 0]], dtype=np.complex128)
    c = np.array([[0, 0, 0], [0, 0, 1]], dtype=np.complex128)
    d = np.array([[0, 1], [0, 0]], dtype=np.complex128)
    u[:3, :3] = a
    u[:3, 3:] = b
    u[3:, :3] = c
    u[3:, 3:] = d
    return Colligation(m=3, n=2, U=u)


def random_colligation(m: int, n: int, rng: np.random.Generator) -> Colligation:
    return Colligation(m=m, n=n, U=random_unitary(m + n, rng))


@pytest.fixture
def neil() -> Colligation:
    return neil_colligation()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
