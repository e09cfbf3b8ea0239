import numpy as np
import pytest

from divark.errors import GramMismatch
from divark.linalg import operator_norm, random_unitary
from divark.realization import (
    Colligation,
    colligation_from_blocks,
    complete_to_unitary,
    eval_transfer,
    fiber_eigenvalues,
    flip,
    purity_report,
    scalar_shift_colligation,
)
from divark.variety import interior_grid

from conftest import random_colligation


def test_colligation_rejects_non_unitary():
    with pytest.raises(ValueError):
        Colligation(m=1, n=1, U=np.array([[1.0, 0.0], [0.0, 0.5]]))


def test_transfer_at_zero_is_A(rng):
    col = random_colligation(3, 2, rng)
    sample = eval_transfer(col, 0.0)
    assert np.allclose(sample.psi, col.A)


def test_scalar_shift_transfer():
    col = scalar_shift_colligation()
    for z in (0.3, -0.5j, 0.2 + 0.4j):
        assert np.allclose(eval_transfer(col, z).psi, [[z]])


def test_neil_transfer_is_companion(neil):
    # hand expansion: (I - zD)^{-1} = I + zD since D^2 = 0
    for z in (0.125, 0.3 - 0.2j):
        psi = eval_transfer(neil, z).psi
        want = np.array([[0, 0, z**2], [1, 0, 0], [0, 1, 0]], dtype=complex)
        assert np.allclose(psi, want, atol=1e-14)
    # the underlying unitary is a permutation matrix
    perm = np.abs(neil.U)
    assert np.array_equal(perm, perm.astype(bool).astype(float))
    assert np.allclose(perm.sum(axis=0), 1.0)
    assert np.allclose(perm.sum(axis=1), 1.0)


def test_defect_identity_random_colligations(rng):
    worst = 0.0
    for _ in range(20):
        m = int(rng.integers(1, 5))
        n = int(rng.integers(1, 5))
        col = random_colligation(m, n, rng)
        for _ in range(25):
            z = (rng.uniform(0, 0.99)) * np.exp(2j * np.pi * rng.uniform())
            worst = max(worst, eval_transfer(col, z).defect_residual / m)
    assert worst <= 1e-9


def test_flip_is_involution(rng):
    col = random_colligation(2, 3, rng)
    back = flip(flip(col))
    assert np.array_equal(back.U, col.U)
    assert (back.m, back.n) == (col.m, col.n)


def test_flip_of_scalar_shift():
    col = scalar_shift_colligation()
    flipped = flip(col)
    for w in (0.25, 0.1 + 0.6j):
        assert np.allclose(eval_transfer(flipped, w).psi, [[w]])


def test_flip_neil_swaps_coordinates(neil):
    flipped = flip(neil)
    assert (flipped.m, flipped.n) == (2, 3)
    # det(psi'(a) - bI) vanishes along (a, b) = (t^2, t^3)
    for t in np.linspace(0.05, 0.9, 50) * np.exp(1j * np.linspace(0, 2, 50)):
        if abs(t) >= 1:
            continue
        psi = eval_transfer(flipped, t**2).psi
        det = np.linalg.det(psi - t**3 * np.eye(2))
        assert abs(det) < 1e-10


def test_boundary_unitarity_of_transfer(rng):
    col = random_colligation(3, 3, rng)
    dspec = np.linalg.eigvals(np.asarray(col.D))
    for theta in rng.uniform(0, 2 * np.pi, size=40):
        z = np.exp(1j * theta)
        if np.abs(dspec - np.conj(z)).min() < 1e-3:
            continue
        eigs = np.linalg.eigvals(eval_transfer(col, z).psi)
        assert np.abs(eigs).max() <= 1 + 1e-8
        assert np.abs(eigs).min() >= 1 - 1e-6


def test_purity_scalar_shift():
    rep = purity_report(scalar_shift_colligation(), interior_grid(16))
    assert rep.norm_A == pytest.approx(0.0, abs=1e-15)
    assert rep.ker_C_dim == 0
    assert rep.constant_unimodular_sheet is False


def test_purity_identity_colligation():
    col = colligation_from_blocks([[1.0]], [[0.0]], [[0.0]], [[1.0]])
    rep = purity_report(col, interior_grid(16))
    assert rep.norm_A == pytest.approx(1.0)
    assert rep.ker_C_dim == 1
    assert rep.constant_unimodular_sheet is True


def test_purity_neil(neil):
    rep = purity_report(neil, interior_grid(25))
    assert rep.norm_A == pytest.approx(1.0)
    assert rep.ker_C_dim == 2
    # eigenvalue moduli are |z|^{2/3} < 1 on the grid, so no constant sheet
    assert rep.constant_unimodular_sheet is False


def test_complete_to_unitary_identity_on_basis():
    x = np.eye(4)[:, :2].astype(complex)
    u = complete_to_unitary(x, x)
    assert np.allclose(u, np.eye(4))


def test_complete_to_unitary_monomial_shift(rng):
    # columns (1, z, z^2, z^3, z^4)^t mapped to the cyclic shift by 2
    zetas = 0.8 * np.exp(2j * np.pi * rng.uniform(size=9)) * rng.uniform(0.3, 1.0, size=9)
    x = np.vstack([zetas**k for k in range(5)])
    y = np.vstack([zetas**((k + 3) % 5) for k in range(5)])
    # mapping z^i -> slot of z^i in y: y rows are z^3, z^4, 1, z, z^2
    u = complete_to_unitary(x, y)
    want = np.zeros((5, 5))
    for i in range(5):
        want[(i + 2) % 5, i] = 1.0
    assert np.allclose(u, want, atol=1e-8)
    fresh = 0.7 * np.exp(2j * np.pi * rng.uniform(size=10))
    xf = np.vstack([fresh**k for k in range(5)])
    yf = np.vstack([fresh**((k + 3) % 5) for k in range(5)])
    assert operator_norm(u @ xf - yf) < 1e-8


def test_complete_to_unitary_recovers_unitary(rng):
    w = random_unitary(5, rng)
    x = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    y = w @ x
    u = complete_to_unitary(x, y)
    assert operator_norm(u @ x - y) <= 1e-9 * (1 + operator_norm(x))
    assert operator_norm(u.conj().T @ u - np.eye(5)) < 1e-12


def test_complete_to_unitary_gram_mismatch():
    x = np.eye(3)[:, :1].astype(complex)
    y = 2.0 * x
    with pytest.raises(GramMismatch):
        complete_to_unitary(x, y)


def test_complete_to_unitary_deterministic(rng):
    x = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
    w = random_unitary(6, rng)
    y = w @ x
    u1 = complete_to_unitary(x, y)
    u2 = complete_to_unitary(x.copy(), y.copy())
    assert np.array_equal(u1, u2)


def test_fiber_eigenvalues_neil(neil):
    omega = np.exp(2j * np.pi / 3)
    got = fiber_eigenvalues(neil, 0.125)
    want = np.sort_complex(np.array([0.25, 0.25 * omega, 0.25 * omega**2]))
    assert np.allclose(got, want, atol=1e-12)
