"""Variety-sharpened von Neumann bound for commuting matrix contractions.

Given a commuting contractive pair with a joint eigenbasis, the defect
Gram data assembles into a unitary colligation whose variety contains all
joint eigenvalue pairs, and the operator norm of any polynomial in the
pair is dominated by the sup of |p| over that variety's boundary, not
just over the whole torus.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CertificateViolation,
    IndefiniteGram,
    NotDiagonalizable,
    PerturbationFailed,
    UnimodularEigenvalue,
)
from .linalg import DEFAULT_TOL, Tolerances, as_cmatrix, numerical_rank, operator_norm
from .polynomials import Poly2, circle_sup_in_w, torus_grid_values
from .realization import Colligation, complete_to_unitary
from .variety import VarietyRealization, boundary_trace, membership


@dataclass(frozen=True)
class CommutingPair:
    """Two commuting N x N contractions."""

    T1: np.ndarray
    T2: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, compare=False)

    def __post_init__(self):
        t1, t2 = as_cmatrix(self.T1), as_cmatrix(self.T2)
        if t1.shape != t2.shape or t1.shape[0] != t1.shape[1]:
            raise ValueError("T1, T2 must be square matrices of equal size")
        n1, n2 = operator_norm(t1), operator_norm(t2)
        if n1 > 1 + 1e-10 or n2 > 1 + 1e-10:
            raise ValueError(f"matrices must be contractions, norms {n1:.12f}, {n2:.12f}")
        comm = operator_norm(t1 @ t2 - t2 @ t1)
        if comm > 1e-10 * (1.0 + n1 * n2):
            raise ValueError(f"matrices do not commute: commutator norm {comm:.3e}")
        object.__setattr__(self, "T1", t1)
        object.__setattr__(self, "T2", t2)

    @property
    def N(self) -> int:
        return self.T1.shape[0]


@dataclass(frozen=True)
class SpectralData:
    """Joint eigensystem: T_r eigvecs[:, j] = eigvals_r[j] eigvecs[:, j]."""

    eigvals1: np.ndarray
    eigvals2: np.ndarray
    eigvecs: np.ndarray
    basis_condition: float


def joint_eigensystem(pair: CommutingPair, seed: int = 0, retries: int = 5) -> SpectralData:
    """Simultaneous eigenbasis via a generic linear combination.

    Retries with fresh random coefficients when the combination has
    colliding eigenvalues; NotDiagonalizable when every attempt yields a
    basis with condition number above 1e8.
    """
    best_cond = np.inf
    for attempt in range(retries):
        rng = np.random.default_rng(seed + attempt)
        alpha, beta = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        scale = np.hypot(abs(alpha), abs(beta))
        s = (alpha / scale) * pair.T1 + (beta / scale) * pair.T2
        _, vecs = np.linalg.eig(s)
        cond = float(np.linalg.cond(vecs))
        best_cond = min(best_cond, cond)
        if cond > 1e8:
            continue
        vecs = vecs / np.linalg.norm(vecs, axis=0, keepdims=True)
        lam1 = np.einsum("ij,ij->j", vecs.conj(), pair.T1 @ vecs)
        lam2 = np.einsum("ij,ij->j", vecs.conj(), pair.T2 @ vecs)
        resid = max(
            operator_norm(pair.T1 @ vecs - vecs * lam1),
            operator_norm(pair.T2 @ vecs - vecs * lam2),
        )
        if resid > 1e-8 * cond:
            continue
        if max(np.abs(lam1).max(), np.abs(lam2).max()) >= 1.0 - 1e-8:
            raise UnimodularEigenvalue(
                "an eigenvalue lies on (or too close to) the unit circle"
            )
        return SpectralData(
            eigvals1=lam1, eigvals2=lam2, eigvecs=vecs, basis_condition=cond
        )
    raise NotDiagonalizable(
        f"no well-conditioned joint eigenbasis found (best condition {best_cond:.3e})"
    )


@dataclass(frozen=True)
class DefectVectors:
    """Columns u1[:, j], u2[:, j] whose Grams reproduce the defect data
    <u_j^r, u_i^r> = (1 - conj(l_i^r) l_j^r) <v_j, v_i>."""

    d1: int
    d2: int
    u1: np.ndarray
    u2: np.ndarray


def _gram_factor(g: np.ndarray, tol: Tolerances):
    """Rank-revealing factor F with F^* F = g (g Hermitian PSD)."""
    w, v = np.linalg.eigh((g + g.conj().T) / 2.0)
    if w.min() < -1e-8 * max(w.max(), 1.0):
        raise IndefiniteGram(f"Gram matrix has eigenvalue {w.min():.3e}")
    d = numerical_rank(np.maximum(w, 0.0), tol)
    d = max(d, 1)
    top = w[::-1][:d]
    cols = v[:, ::-1][:, :d]
    # phase convention keeps the factor deterministic across runs
    for j in range(d):
        i = int(np.argmax(np.abs(cols[:, j])))
        a = cols[i, j]
        if abs(a) > 0:
            cols[:, j] *= np.conj(a) / abs(a)
    return (np.sqrt(np.maximum(top, 0.0))[:, None] * cols.conj().T), d


def defect_vectors(sd: SpectralData, tol: Tolerances = DEFAULT_TOL) -> DefectVectors:
    """Factor both defect Grams by Hermitian eigendecomposition."""
    p = sd.eigvecs.conj().T @ sd.eigvecs
    g1 = (1.0 - np.conj(sd.eigvals1[:, None]) * sd.eigvals1[None, :]) * p
    g2 = (1.0 - np.conj(sd.eigvals2[:, None]) * sd.eigvals2[None, :]) * p
    u1, d1 = _gram_factor(g1, tol)
    u2, d2 = _gram_factor(g2, tol)
    return DefectVectors(d1=d1, d2=d2, u1=u1, u2=u2)


def ando_colligation(dv: DefectVectors, sd: SpectralData, tol: Tolerances = DEFAULT_TOL) -> Colligation:
    """Unitary U with U (u_j^1 (+) l_j^1 u_j^2) = (l_j^2 u_j^1 (+) u_j^2)."""
    x = np.vstack([dv.u1, sd.eigvals1[None, :] * dv.u2])
    y = np.vstack([sd.eigvals2[None, :] * dv.u1, dv.u2])
    u = complete_to_unitary(x, y, tol)
    return Colligation(m=dv.d1, n=dv.d2, U=u, tol=tol)


def conjugate_transfer(col: Colligation) -> Colligation:
    """The colligation of psi-check, with blocks (A^*, C^*, B^*, D^*).

    Its transfer function phi satisfies phi(conj(z)) = psi(z)^* pointwise,
    so it realizes the reflected variety {(z, w) : (conj z, conj w) in V}.
    """
    return Colligation(m=col.m, n=col.n, U=col.U.conj().T, tol=col.tol)


@dataclass(frozen=True)
class AndoCertificate:
    """Numeric witness for ||p(T1, T2)|| <= sup over the variety boundary."""

    polynomial: Poly2
    lhs: float
    rhs_variety: float
    rhs_bidisk: float
    margin: float
    slack: float
    grid: int
    node_residuals: np.ndarray
    colligation: Colligation

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs_variety + self.slack


def realize_pair(pair: CommutingPair, seed: int = 0, tol: Tolerances = DEFAULT_TOL):
    """Run the pipeline up to the variety; returns (spectral, defects, variety)."""
    sd = joint_eigensystem(pair, seed=seed)
    dv = defect_vectors(sd, tol)
    col = ando_colligation(dv, sd, tol)
    return sd, dv, VarietyRealization(col=col, tol=tol)


def certify(pair: CommutingPair, p: Poly2, g: int, seed: int = 0,
            tol: Tolerances = DEFAULT_TOL) -> AndoCertificate:
    """Certify the variety bound for p on the pair, sampling at grid size g.

    The boundary maximum is taken over trace points radially projected to
    the torus; the bidisk maximum combines the g x g grid with exact
    suprema in w at any angle where the variety value would otherwise
    exceed the grid value, so the reported sharpening inequality
    rhs_variety <= rhs_bidisk is structural rather than a sampling accident.
    """
    if len(p.coeffs) > 1000:
        raise ValueError("polynomial has too many terms")
    sd, dv, v = realize_pair(pair, seed=seed, tol=tol)

    lhs = operator_norm(p.eval_matrix_pair(pair.T1, pair.T2))

    trace = boundary_trace(v, g, verify=False)
    zs = np.exp(1j * trace.thetas)
    ws = trace.branches / np.abs(trace.branches)
    variety_vals = np.abs(p(zs[:, None], ws))
    rhs_variety = float(variety_vals.max())

    rhs_bidisk = float(np.abs(torus_grid_values(p, g)).max())
    if rhs_variety > rhs_bidisk:
        contested = np.unique(np.nonzero(variety_vals > rhs_bidisk)[0])
        for t in contested:
            rhs_bidisk = max(rhs_bidisk, circle_sup_in_w(p, complex(zs[t])))

    slack = 1e-6 + 10.0 / g
    node_residuals = np.array(
        [
            membership(v, complex(z), complex(w)).residual
            for z, w in zip(sd.eigvals1, sd.eigvals2)
        ]
    )
    cert = AndoCertificate(
        polynomial=p,
        lhs=float(lhs),
        rhs_variety=rhs_variety,
        rhs_bidisk=rhs_bidisk,
        margin=rhs_variety - float(lhs),
        slack=slack,
        grid=g,
        node_residuals=node_residuals,
        colligation=v.col,
    )
    if not cert.holds:
        raise CertificateViolation(
            f"||p(T1,T2)|| = {lhs:.12f} exceeds variety bound {rhs_variety:.12f} "
            f"+ slack {slack:.2e}"
        )
    return cert


def _poly_in_matrix(target: np.ndarray, s_powers) -> tuple:
    """Least-squares coefficients expressing target in the span of s_powers."""
    basis = np.stack([p.reshape(-1) for p in s_powers], axis=1)
    coeff, *_ = np.linalg.lstsq(basis, target.reshape(-1), rcond=None)
    resid = operator_norm((basis @ coeff).reshape(target.shape) - target)
    return coeff, resid


def perturb_to_generic(pair: CommutingPair, eps: float, seed: int = 0) -> CommutingPair:
    """Nudge the pair into the diagonalizable regime, preserving commutation.

    An already-generic pair is just rescaled.  Otherwise both matrices are
    written as polynomials of a generic combination S (possible whenever S
    is nonderogatory, e.g. for Jordan-plus-functional-calculus pairs), the
    triangularization of S is perturbed on its diagonal and bottom corner
    to split the spectrum, and the pair is re-assembled through those
    polynomials, so the output commutes exactly.  Contractivity is restored
    by scaling with 1/(1 + eps).
    """
    if not (0 < eps <= 1e-2):
        raise ValueError("eps must lie in (0, 1e-2]")
    n = pair.N
    shrink = 1.0 / (1.0 + eps)
    try:
        candidate = CommutingPair(T1=pair.T1 * shrink, T2=pair.T2 * shrink, tol=pair.tol)
        joint_eigensystem(candidate, seed=seed)
        return candidate
    except (NotDiagonalizable, UnimodularEigenvalue):
        pass
    scale0 = max(operator_norm(pair.T1), operator_norm(pair.T2), 1e-2)
    for attempt in range(10):
        rng = np.random.default_rng(seed + 1009 * attempt)
        alpha, beta = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        s = (alpha * pair.T1 + beta * pair.T2) / np.hypot(abs(alpha), abs(beta))
        powers = [np.eye(n, dtype=np.complex128)]
        for _ in range(n - 1):
            powers.append(powers[-1] @ s)
        c1, r1 = _poly_in_matrix(pair.T1, powers)
        c2, r2 = _poly_in_matrix(pair.T2, powers)
        if max(r1, r2) > 1e-9 * scale0:
            continue  # combination is derogatory; try another one
        delta = eps * scale0 / 20.0
        for _ in range(8):
            bump = np.diag(np.arange(1, n + 1).astype(np.complex128)) / n
            bump[n - 1, 0] += 1.0
            s_pert = s + delta * bump
            powers_p = [np.eye(n, dtype=np.complex128)]
            for _ in range(n - 1):
                powers_p.append(powers_p[-1] @ s_pert)
            t1 = sum(c * p for c, p in zip(c1, powers_p)) * shrink
            t2 = sum(c * p for c, p in zip(c2, powers_p)) * shrink
            dist = max(operator_norm(t1 - pair.T1), operator_norm(t2 - pair.T2))
            if dist <= eps:
                try:
                    candidate = CommutingPair(T1=t1, T2=t2, tol=pair.tol)
                    joint_eigensystem(candidate, seed=seed)
                    return candidate
                except (ValueError, NotDiagonalizable, UnimodularEigenvalue):
                    pass
            delta /= 4.0
    raise PerturbationFailed("no commuting-preserving perturbation succeeded in 10 seeds")
