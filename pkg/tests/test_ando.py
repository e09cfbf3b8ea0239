import numpy as np
import pytest

from divark.ando import (
    AndoCertificate,
    CommutingPair,
    ando_colligation,
    certify,
    conjugate_transfer,
    defect_vectors,
    joint_eigensystem,
    perturb_to_generic,
    realize_pair,
)
from divark.errors import IndefiniteGram, NotDiagonalizable, UnimodularEigenvalue
from divark.linalg import operator_norm
from divark.polynomials import Poly2
from divark.realization import eval_transfer, scalar_shift_colligation

from conftest import random_colligation


def random_commuting_pair(rng, n, top=0.9, cond_cap=8.0):
    """Simultaneously diagonalizable contractive pair with a shared basis."""
    while True:
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        v = np.linalg.qr(g)[0] + 0.25 * (
            rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        )
        if np.linalg.cond(v) <= cond_cap:
            break
    lam1 = top * rng.uniform(0.1, 1.0, n) * np.exp(2j * np.pi * rng.uniform(size=n))
    lam2 = top * rng.uniform(0.1, 1.0, n) * np.exp(2j * np.pi * rng.uniform(size=n))
    vinv = np.linalg.inv(v)
    t1 = v @ np.diag(lam1) @ vinv
    t2 = v @ np.diag(lam2) @ vinv
    scale = max(operator_norm(t1), operator_norm(t2)) / top
    if scale > 1.0:
        t1, t2 = t1 / scale, t2 / scale
    return CommutingPair(T1=t1, T2=t2)


def test_pair_validation_rejects_noncommuting():
    with pytest.raises(ValueError):
        CommutingPair(T1=np.array([[0, 0.5], [0, 0]]), T2=np.array([[0, 0], [0.5, 0]]))
    with pytest.raises(ValueError):
        CommutingPair(T1=2 * np.eye(2), T2=np.eye(2))


def test_joint_eigensystem_diagonal():
    pair = CommutingPair(T1=np.diag([0.0, 0.5]), T2=np.diag([0.0, 0.5]))
    sd = joint_eigensystem(pair)
    assert np.allclose(np.abs(sd.eigvecs), np.eye(2))
    assert sorted(np.round(sd.eigvals1.real, 12)) == [0.0, 0.5]
    assert np.allclose(np.sort_complex(sd.eigvals1), np.sort_complex(sd.eigvals2))


def test_joint_eigensystem_functional_calculus():
    t1 = np.diag([0.5, 1.0 / 3.0])
    pair = CommutingPair(T1=t1, T2=t1 @ t1)
    sd = joint_eigensystem(pair)
    order = np.argsort(sd.eigvals1.real)
    assert np.allclose(sd.eigvals1[order], [1.0 / 3.0, 0.5], atol=1e-12)
    assert np.allclose(sd.eigvals2[order], [1.0 / 9.0, 0.25], atol=1e-12)


def test_joint_eigensystem_rejects_jordan():
    pair = CommutingPair(T1=np.array([[0, 0.5], [0, 0]]), T2=0.5 * np.eye(2))
    with pytest.raises(NotDiagonalizable):
        joint_eigensystem(pair)


def test_joint_eigensystem_rejects_unimodular():
    pair = CommutingPair(T1=np.diag([1.0, 0.5]), T2=np.diag([0.3, 0.2]))
    with pytest.raises(UnimodularEigenvalue):
        joint_eigensystem(pair)


def test_defect_vectors_diagonal_pair():
    pair = CommutingPair(T1=np.diag([0.0, 0.5]), T2=np.diag([0.0, 0.5]))
    sd = joint_eigensystem(pair)
    dv = defect_vectors(sd)
    assert dv.d1 == dv.d2 == 2
    gram = dv.u1.conj().T @ dv.u1
    order = np.argsort(sd.eigvals1.real)
    want = np.diag([1.0, 0.75])
    assert np.allclose(gram[np.ix_(order, order)], want, atol=1e-12)


def test_defect_vectors_zero_contraction():
    pair = CommutingPair(T1=np.zeros((3, 3)), T2=np.diag([0.1, 0.2, 0.3]))
    sd = joint_eigensystem(pair)
    dv = defect_vectors(sd)
    assert np.allclose(dv.u1.conj().T @ dv.u1, np.eye(3), atol=1e-12)


def test_defect_gram_reconstruction(rng):
    pair = random_commuting_pair(rng, 4)
    sd = joint_eigensystem(pair)
    dv = defect_vectors(sd)
    p = sd.eigvecs.conj().T @ sd.eigvecs
    g1 = (1 - np.conj(sd.eigvals1[:, None]) * sd.eigvals1[None, :]) * p
    g2 = (1 - np.conj(sd.eigvals2[:, None]) * sd.eigvals2[None, :]) * p
    assert np.abs(dv.u1.conj().T @ dv.u1 - g1).max() <= 1e-9
    assert np.abs(dv.u2.conj().T @ dv.u2 - g2).max() <= 1e-9


def test_gram_identity_cross_relation(rng):
    for _ in range(5):
        pair = random_commuting_pair(rng, 4)
        sd = joint_eigensystem(pair)
        dv = defect_vectors(sd)
        gu1 = dv.u1.conj().T @ dv.u1
        gu2 = dv.u2.conj().T @ dv.u2
        lhs = (1 - np.conj(sd.eigvals1[:, None]) * sd.eigvals1[None, :]) * gu2
        rhs = (1 - np.conj(sd.eigvals2[:, None]) * sd.eigvals2[None, :]) * gu1
        assert np.abs(lhs - rhs).max() <= 1e-8


def test_colligation_intertwining_example():
    pair = CommutingPair(T1=np.diag([0.0, 0.5]), T2=np.diag([0.0, 0.5]))
    sd = joint_eigensystem(pair)
    dv = defect_vectors(sd)
    col = ando_colligation(dv, sd)
    x = np.vstack([dv.u1, sd.eigvals1[None, :] * dv.u2])
    y = np.vstack([sd.eigvals2[None, :] * dv.u1, dv.u2])
    assert np.abs(col.U @ x - y).max() < 1e-7


def test_colligation_scalar_pair_gives_diagonal_variety():
    c = 0.35 - 0.2j
    pair = CommutingPair(T1=np.array([[c]]), T2=np.array([[c]]))
    sd, dv, v = realize_pair(pair)
    assert (dv.d1, dv.d2) == (1, 1)
    assert np.allclose(np.abs(col_u := v.col.U), np.array([[0, 1], [1, 0]]), atol=1e-10)
    for z in (0.3, -0.1 + 0.55j):
        assert np.allclose(eval_transfer(v.col, z).psi, [[z]], atol=1e-10)
    del col_u


def test_transfer_eigen_relation_random_pair(rng):
    pair = random_commuting_pair(rng, 5)
    sd = joint_eigensystem(pair)
    dv = defect_vectors(sd)
    col = ando_colligation(dv, sd)
    for j in range(pair.N):
        psi = eval_transfer(col, complex(sd.eigvals1[j])).psi
        u = dv.u1[:, j]
        assert np.abs(psi @ u - sd.eigvals2[j] * u).max() <= 1e-6


def test_conjugate_transfer_identity(rng):
    col = random_colligation(3, 2, rng)
    conj_col = conjugate_transfer(col)
    for _ in range(50):
        z = 0.9 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        phi = eval_transfer(conj_col, np.conj(z)).psi
        psi = eval_transfer(col, z).psi
        assert operator_norm(phi - psi.conj().T) <= 1e-10


def test_conjugate_transfer_scalar_shift():
    col = scalar_shift_colligation()
    conj_col = conjugate_transfer(col)
    for z in (0.2, 0.4j):
        assert np.allclose(eval_transfer(conj_col, z).psi, [[z]])


def test_certify_vanishing_polynomial():
    pair = CommutingPair(T1=np.diag([0.0, 0.5]), T2=np.diag([0.0, 0.5]))
    p = Poly2(((1, 0, 1.0), (0, 1, -1.0)))  # z - w
    cert = certify(pair, p, 256)
    assert cert.lhs <= 1e-12
    assert cert.holds


def test_certify_average_polynomial():
    pair = CommutingPair(T1=np.diag([0.0, 0.5]), T2=np.diag([0.0, 0.5]))
    p = Poly2(((1, 0, 0.5), (0, 1, 0.5)))  # (z + w) / 2
    cert = certify(pair, p, 512)
    assert cert.lhs == pytest.approx(0.5, abs=1e-12)
    assert cert.margin >= 0
    assert cert.node_residuals.max() <= 1e-6
    assert cert.rhs_variety <= cert.rhs_bidisk + 1e-9


def test_certificate_bulk_random(rng):
    for _ in range(6):
        n = int(rng.integers(2, 5))
        pair = random_commuting_pair(rng, n)
        for _ in range(3):
            terms = []
            for i in range(3):
                for j in range(3):
                    terms.append((i, j, (rng.standard_normal() + 1j * rng.standard_normal()) / 4))
            p = Poly2(tuple(terms))
            cert = certify(pair, p, 256)
            assert cert.holds
            assert cert.rhs_variety <= cert.rhs_bidisk + 1e-9
            assert cert.node_residuals.max() <= 1e-6


def test_perturb_jordan_block():
    t1 = np.array([[0, 0.5, 0], [0, 0, 0.5], [0, 0, 0]], dtype=complex)
    pair = CommutingPair(T1=t1, T2=t1 @ t1)
    out = perturb_to_generic(pair, 1e-3, seed=3)
    assert operator_norm(out.T1 - pair.T1) <= 1e-3
    assert operator_norm(out.T2 - pair.T2) <= 1e-3
    assert operator_norm(out.T1 @ out.T2 - out.T2 @ out.T1) <= 1e-10 * 2
    sd = joint_eigensystem(out)
    assert sd.basis_condition < 1e8


def test_perturb_generic_pair_stays_close(rng):
    pair = random_commuting_pair(rng, 3)
    out = perturb_to_generic(pair, 1e-4)
    assert operator_norm(out.T1 - pair.T1) <= 1e-4
    joint_eigensystem(out)


def test_perturb_separates_repeated_eigenvalues():
    pair = CommutingPair(T1=np.diag([0.4, 0.4, 0.1]), T2=np.diag([0.2, 0.3, 0.3]))
    out = perturb_to_generic(pair, 1e-3, seed=1)
    sd = joint_eigensystem(out)
    combo = sd.eigvals1 + 0.37j * sd.eigvals2
    gaps = np.abs(combo[:, None] - combo[None, :])[~np.eye(3, dtype=bool)]
    assert gaps.min() > 1e-8
