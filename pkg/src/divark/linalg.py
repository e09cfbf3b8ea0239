"""Dense complex linear algebra and the shared tolerance policy.

Everything downstream (realizations, traces, kernels) goes through the
handful of contracts in this module, so tolerances live in one value that
is threaded explicitly instead of hiding in globals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, NotHermitian


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances used throughout the toolkit.

    rank_tol is relative to the largest eigenvalue (or singular value) of
    the matrix whose rank is being decided.
    """

    unitary_tol: float = 1e-10
    psd_tol: float = 1e-9
    membership_tol: float = 1e-8
    rank_tol: float = 1e-10
    bisect_tol: float = 1e-4

    def __post_init__(self):
        for name in ("unitary_tol", "psd_tol", "membership_tol", "rank_tol", "bisect_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_TOL = Tolerances()


def as_cmatrix(a) -> np.ndarray:
    """Coerce to a 2-d complex128 array with finite entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValueError("matrix entries must be finite")
    return m


def operator_norm(m) -> float:
    """Largest singular value."""
    m = np.atleast_2d(np.asarray(m, dtype=np.complex128))
    return float(np.linalg.norm(m, 2))


def hermitian_eig(m, tol: Tolerances = DEFAULT_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvectors as unitary columns).
    Raises NotHermitian when the input is not Hermitian to within
    unitary_tol relative to its norm.
    """
    m = as_cmatrix(m)
    if m.shape[0] != m.shape[1]:
        raise NotHermitian(f"matrix is {m.shape[0]}x{m.shape[1]}, not square")
    scale = operator_norm(m)
    if operator_norm(m - m.conj().T) > tol.unitary_tol * max(scale, 1.0):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh((m + m.conj().T) / 2.0)
    return w, v


def general_eig(m) -> np.ndarray:
    """Eigenvalues of a square matrix, sorted lexicographically by (re, im)."""
    m = as_cmatrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    try:
        w = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigenvalue iteration failed: {exc}") from exc
    return np.sort_complex(w)


def numerical_rank(values, tol: Tolerances = DEFAULT_TOL) -> int:
    """Number of entries exceeding rank_tol times the largest one.

    `values` is a 1-d array of nonnegative reals (eigenvalues of a PSD
    matrix or singular values).
    """
    v = np.asarray(values, dtype=float)
    top = float(v.max(initial=0.0))
    if top <= 0.0:
        return 0
    return int(np.count_nonzero(v > tol.rank_tol * top))


def matrix_rank(m, tol: Tolerances = DEFAULT_TOL) -> int:
    """Numerical rank via singular values."""
    s = np.linalg.svd(as_cmatrix(m), compute_uv=False)
    return numerical_rank(s, tol)


def min_eig_hermitian(m) -> float:
    """Smallest eigenvalue of (the Hermitian part of) m."""
    m = np.asarray(m, dtype=np.complex128)
    w = np.linalg.eigvalsh((m + m.conj().T) / 2.0)
    return float(w[0])


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random unitary from the QR of a complex Ginibre matrix."""
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))
