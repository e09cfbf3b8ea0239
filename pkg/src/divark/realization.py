"""Unitary colligations and their transfer functions.

A colligation is a unitary block matrix U = [[A, B], [C, D]] acting on
C^m (+) C^n.  Its transfer function z |-> A + z B (I - z D)^{-1} C is a
rational matrix inner function: contractive on the disk and unitary on
the circle, which is what makes det(transfer(z) - w I) = 0 cut out a
distinguished variety of the bidisk.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GramMismatch, SingularResolvent
from .linalg import DEFAULT_TOL, Tolerances, as_cmatrix, general_eig, matrix_rank, operator_norm
from ._kernels import eig_sweep


@dataclass(frozen=True)
class Colligation:
    """Unitary (m+n)x(m+n) block matrix with output block of size m."""

    m: int
    n: int
    U: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, compare=False)

    def __post_init__(self):
        u = as_cmatrix(self.U)
        if self.m < 1 or self.n < 1:
            raise ValueError("block sizes m, n must be >= 1")
        if u.shape != (self.m + self.n, self.m + self.n):
            raise ValueError(f"U has shape {u.shape}, expected {(self.m + self.n,) * 2}")
        eye = np.eye(self.m + self.n)
        err = max(operator_norm(u.conj().T @ u - eye), operator_norm(u @ u.conj().T - eye))
        if err > self.tol.unitary_tol:
            raise ValueError(f"U is not unitary: deviation {err:.3e}")
        u = u.copy()
        u.flags.writeable = False
        object.__setattr__(self, "U", u)

    @property
    def A(self) -> np.ndarray:
        return self.U[: self.m, : self.m]

    @property
    def B(self) -> np.ndarray:
        return self.U[: self.m, self.m:]

    @property
    def C(self) -> np.ndarray:
        return self.U[self.m:, : self.m]

    @property
    def D(self) -> np.ndarray:
        return self.U[self.m:, self.m:]


def colligation_from_blocks(A, B, C, D, tol: Tolerances = DEFAULT_TOL) -> Colligation:
    A, B, C, D = map(as_cmatrix, (A, B, C, D))
    m, n = A.shape[0], D.shape[0]
    u = np.block([[A, B], [C, D]])
    return Colligation(m=m, n=n, U=u, tol=tol)


@dataclass(frozen=True)
class TransferSample:
    """Transfer-function value at one point of the closed disk.

    defect_residual measures how far I - psi^* psi falls from the
    resolvent identity (1 - |z|^2) C^* (I - zbar D^*)^{-1} (I - z D)^{-1} C
    that unitarity of the colligation forces.
    """

    z: complex
    psi: np.ndarray
    defect_residual: float


def eval_transfer(col: Colligation, z: complex) -> TransferSample:
    """Evaluate the transfer function of col at z, |z| <= 1."""
    z = complex(z)
    if abs(z) > 1 + 1e-12:
        raise ValueError(f"|z| = {abs(z):.6f} lies outside the closed disk")
    n = col.n
    res = np.eye(n) - z * col.D
    smin = np.linalg.svd(res, compute_uv=False)[-1]
    if smin <= 1e-12:
        raise SingularResolvent(f"I - z D is numerically singular at z = {z}")
    x = np.linalg.solve(res, col.C)
    psi = col.A + z * (col.B @ x)
    defect = (np.eye(col.m) - psi.conj().T @ psi) - (1.0 - abs(z) ** 2) * (x.conj().T @ x)
    return TransferSample(z=z, psi=psi, defect_residual=operator_norm(defect))


def transfer_eigenvalues(col: Colligation, zs) -> np.ndarray:
    """Eigenvalues of the transfer function along an array of points."""
    zs = np.asarray(zs, dtype=np.complex128)
    smin = _resolvent_floor(col, zs)
    if smin <= 1e-12:
        raise SingularResolvent("I - z D numerically singular along the sweep")
    return eig_sweep(col.A, col.B, col.C, col.D, zs)


def _resolvent_floor(col: Colligation, zs) -> float:
    # cheap lower bound: sigma_min(I - zD) >= 1 - |z| ||D||; only fall back to
    # exact svd when the bound cannot certify invertibility
    bound = 1.0 - np.abs(zs).max() * operator_norm(col.D)
    if bound > 1e-6:
        return bound
    eye = np.eye(col.n)
    return min(
        float(np.linalg.svd(eye - z * col.D, compute_uv=False)[-1]) for z in np.atleast_1d(zs)
    )


def flip(col: Colligation) -> Colligation:
    """The colligation with blocks (D^*, B^*, C^*, A^*) and sizes (n, m).

    Its transfer function realizes the same variety with the roles of the
    two coordinates exchanged: det(psi(z) - w) = 0 iff det(psi'(w) - z) = 0.
    """
    u = np.block(
        [[col.D.conj().T, col.B.conj().T], [col.C.conj().T, col.A.conj().T]]
    )
    return Colligation(m=col.n, n=col.m, U=u, tol=col.tol)


@dataclass(frozen=True)
class PurityReport:
    norm_A: float
    ker_C_dim: int
    constant_unimodular_sheet: bool


def purity_report(col: Colligation, interior_grid) -> PurityReport:
    """Diagnostics deciding whether the transfer function carries a constant
    unitary summand.

    ker C != 0 forces an isometric direction of the transfer function, which
    by the maximum principle is a constant unimodular eigenvalue sheet; the
    sheet flag tests for that behaviour directly on the grid.
    """
    grid = np.asarray(list(interior_grid), dtype=np.complex128)
    if grid.size == 0:
        raise ValueError("interior grid must be non-empty")
    if np.abs(grid).max() >= 1.0:
        raise ValueError("grid points must lie strictly inside the disk")
    norm_a = operator_norm(col.A)
    ker_dim = col.m - matrix_rank(col.C, col.tol)
    eigs = transfer_eigenvalues(col, grid)
    sheet = bool(np.abs(eigs).max(axis=1).min() >= 1.0 - 1e-8)
    return PurityReport(norm_A=norm_a, ker_C_dim=ker_dim, constant_unimodular_sheet=sheet)


def _phase_normalize_columns(q: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive."""
    q = q.copy()
    for j in range(q.shape[1]):
        i = int(np.argmax(np.abs(q[:, j])))
        a = q[i, j]
        if abs(a) > 0:
            q[:, j] *= np.conj(a) / abs(a)
    return q


def complete_to_unitary(X, Y, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Deterministic unitary U with U X = Y, given Gram consistency X^*X = Y^*Y.

    The action on range(X) is forced; on the orthogonal complement we map a
    phase-normalized basis of range(X)^perp onto one of range(Y)^perp in
    fixed order, then polish to an exact unitary.
    """
    X = as_cmatrix(X)
    Y = as_cmatrix(Y)
    if X.shape != Y.shape:
        raise ValueError("X and Y must have equal shapes")
    p = X.shape[0]
    scale = 1.0 + operator_norm(X) ** 2
    gram_err = operator_norm(X.conj().T @ X - Y.conj().T @ Y)
    if gram_err > 1e-8 * scale:
        raise GramMismatch(
            f"Gram matrices differ by {gram_err:.3e} (allowed {1e-8 * scale:.3e})"
        )

    w, s, vh = np.linalg.svd(X)
    cut = max(tol.rank_tol, 1e-9) * (s[0] if s.size and s[0] > 0 else 1.0)
    r = int(np.count_nonzero(s > cut))
    if r == 0:
        # X ~ 0, so Y ~ 0 as well; any unitary works, pick the identity
        return np.eye(p, dtype=np.complex128)
    p_basis = w[:, :r]
    images = Y @ vh[:r, :].conj().T / s[:r]
    # re-orthonormalize the image frame (Gram noise inflates as 1/sigma^2)
    iw, _, ivh = np.linalg.svd(images, full_matrices=False)
    images = iw @ ivh

    comp_x = _phase_normalize_columns(w[:, r:])
    wy, _, _ = np.linalg.svd(images)
    comp_y = _phase_normalize_columns(wy[:, r:])

    u = np.hstack([images, comp_y]) @ np.hstack([p_basis, comp_x]).conj().T
    # polar polish to machine unitarity
    uw, _, uvh = np.linalg.svd(u)
    return uw @ uvh


def scalar_shift_colligation(tol: Tolerances = DEFAULT_TOL) -> Colligation:
    """The 2x2 swap colligation, whose transfer function is z itself."""
    u = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
    return Colligation(m=1, n=1, U=u, tol=tol)


def fiber_eigenvalues(col: Colligation, z: complex) -> np.ndarray:
    """Eigenvalues of the transfer function at a single point (sorted)."""
    return general_eig(eval_transfer(col, z).psi)
