"""Extremal Pick interpolation on the bidisk.

Solvability is decided through the two-term PSD decomposition of the
value Pick matrix (the dual of the admissible-kernel criterion), found by
alternating projections with a Dykstra correction.  Extremal problems are
detected by norm bisection, their active kernels located by projected
subgradient descent with an alternating-projection polish, and an active
kernel extends to a continuous admissible kernel on a distinguished
variety through the nodes, where the two-sum formula pins the unique
value of every norm-one interpolant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import DykstraState, subgrad_search
from .errors import (
    DegenerateFormula,
    Inconclusive,
    NoActiveKernelFound,
    NotExtremal,
    NotPositiveDefinite,
    NullSpaceDegenerate,
)
from .linalg import DEFAULT_TOL, Tolerances, as_cmatrix, min_eig_hermitian
from .realization import Colligation, complete_to_unitary
from .ando import _gram_factor
from .variety import VarietyRealization, membership


@dataclass(frozen=True)
class PickProblem:
    """Interpolation data: nodes in the open bidisk, targets in the closed disk.

    Single-node problems are allowed so that delete-one subproblems of the
    minimality test are themselves problems.
    """

    nodes: tuple
    values: tuple

    def __post_init__(self):
        nodes = tuple((complex(a), complex(b)) for a, b in self.nodes)
        values = tuple(complex(v) for v in self.values)
        if len(nodes) != len(values) or len(nodes) < 1:
            raise ValueError("need equally many nodes and values, at least one")
        for a, b in nodes:
            if max(abs(a), abs(b)) >= 1.0 - 1e-9:
                raise ValueError("node coordinates must have modulus < 1 - 1e-9")
        for i in range(len(nodes)):
            for j in range(i + 1, len(nodes)):
                if abs(nodes[i][0] - nodes[j][0]) + abs(nodes[i][1] - nodes[j][1]) < 1e-12:
                    raise ValueError("nodes must be pairwise distinct")
        if max(abs(v) for v in values) > 1.0 + 1e-12:
            raise ValueError("values must lie in the closed unit disk")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    @property
    def N(self) -> int:
        return len(self.nodes)

    def coeff_matrices(self, values=None):
        """(E1, E2, W): E_r = 1 - l_i^r conj(l_j^r), W = 1 - w_i conj(w_j)."""
        lam1 = np.array([a for a, _ in self.nodes])
        lam2 = np.array([b for _, b in self.nodes])
        w = np.array(self.values if values is None else values, dtype=np.complex128)
        e1 = 1.0 - lam1[:, None] * np.conj(lam1[None, :])
        e2 = 1.0 - lam2[:, None] * np.conj(lam2[None, :])
        ww = 1.0 - w[:, None] * np.conj(w[None, :])
        return e1, e2, ww

    def drop_node(self, i: int) -> "PickProblem":
        keep = [j for j in range(self.N) if j != i]
        return PickProblem(
            nodes=tuple(self.nodes[j] for j in keep),
            values=tuple(self.values[j] for j in keep),
        )


@dataclass(frozen=True)
class KernelMatrix:
    """Unit-diagonal positive-definite kernel with its admissibility residuals."""

    K: np.ndarray
    residual1: float
    residual2: float
    tol: Tolerances = field(default=DEFAULT_TOL, compare=False)

    @property
    def admissible(self) -> bool:
        return self.residual1 >= -self.tol.psd_tol and self.residual2 >= -self.tol.psd_tol


def admissibility(k_matrix, prob: PickProblem, tol: Tolerances = DEFAULT_TOL) -> KernelMatrix:
    """Classify a unit-diagonal Hermitian matrix against the node data."""
    k = as_cmatrix(k_matrix)
    if k.shape != (prob.N, prob.N):
        raise ValueError("kernel size does not match the problem")
    if np.abs(k - k.conj().T).max() > 1e-10 * (1 + np.abs(k).max()):
        raise ValueError("kernel must be Hermitian")
    if np.abs(np.diagonal(k) - 1.0).max() > 1e-12:
        raise ValueError("kernel must have unit diagonal")
    if min_eig_hermitian(k) <= tol.psd_tol:
        raise NotPositiveDefinite("kernel is not positive definite")
    e1, e2, _ = prob.coeff_matrices()
    return KernelMatrix(
        K=k,
        residual1=min_eig_hermitian(e1 * k),
        residual2=min_eig_hermitian(e2 * k),
        tol=tol,
    )


# ---------------------------------------------------------------------------
# solvability via the two-term decomposition


@dataclass(frozen=True)
class SolvabilityReport:
    solvable: bool
    gamma1: np.ndarray | None
    gamma2: np.ndarray | None
    decomposition_residual: float
    adversarial: KernelMatrix | None
    iterations: int


def _run_decomposition(e1, e2, f, max_chunks=40, chunk=2500, conv_tol=5e-11):
    """Chunked Dykstra solve with a clip-and-test feasibility exit.

    Returns (gamma1, gamma2, residual, iterations) or (None, None, best, its).
    """
    state = DykstraState(e1, e2, f)
    scale = 1.0 + float(np.abs(f).max())
    best = np.inf
    stalled = 0
    for _ in range(max_chunks):
        state.run(chunk, conv_tol)
        g1 = _psd_clip(state.g1)
        g2 = _psd_clip(state.g2)
        resid = float(np.abs(e1 * g1 + e2 * g2 - f).max())
        if resid <= 1e-8 * scale:
            return g1, g2, resid, state.iterations
        if state.converged:
            break
        if resid > best * 0.999:
            stalled += 1
            if stalled >= 3:
                break
        else:
            stalled = 0
        best = min(best, resid)
    g1 = _psd_clip(state.g1)
    g2 = _psd_clip(state.g2)
    resid = float(np.abs(e1 * g1 + e2 * g2 - f).max())
    if resid <= 1e-7 * scale:
        return g1, g2, resid, state.iterations
    return None, None, resid, state.iterations


def _psd_clip(m):
    m = (m + m.conj().T) / 2.0
    w, v = np.linalg.eigh(m)
    return (v * np.maximum(w, 0.0)) @ v.conj().T


def _hermitize(m):
    return (m + m.conj().T) / 2.0


def _search_inits(prob: PickProblem, e1, e2, restarts, seed):
    """Deterministic initial factors: coordinate kernels, blends, then random."""
    n = prob.N
    lam1 = np.array([a for a, _ in prob.nodes])
    lam2 = np.array([b for _, b in prob.nodes])
    mats = []
    for lam in (lam1, lam2):
        s = 1.0 / (1.0 - lam[:, None] * np.conj(lam[None, :]))
        d = 1.0 / np.sqrt(np.real(np.diagonal(s)))
        mats.append(_hermitize(s * np.outer(d, d)))
    mats.append(_hermitize(0.5 * (mats[0] + mats[1])))
    mats.append(np.eye(n, dtype=np.complex128))
    inits = []
    for m in mats:
        w, v = np.linalg.eigh(m)
        inits.append((v * np.sqrt(np.maximum(w, 1e-8))) @ v.conj().T)
    rng = np.random.default_rng(seed)
    while len(inits) < restarts:
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        inits.append(np.eye(n) + 0.45 * g / np.sqrt(n))
    return inits[:restarts]


def search_active_kernel(prob: PickProblem, tol: Tolerances = DEFAULT_TOL,
                         restarts: int = 20, iters: int = 1500, seed: int = 0,
                         polish: bool = True):
    """Minimise the smallest eigenvalue of the value Pick matrix over the
    admissible set.  Returns (K or None, best slack found).

    For extremal problems the infimum is zero and the polished minimiser is
    an active kernel; for strictly solvable problems the slack stays
    positive; for unsolvable problems it goes negative.
    """
    e1, e2, w = prob.coeff_matrices()
    best_k, best_slack = None, np.inf
    for l0 in _search_inits(prob, e1, e2, restarts, seed):
        k, slack = subgrad_search(e1, e2, w, l0, iters=iters,
                                  pd_floor=tol.psd_tol)
        if polish and k is not None and slack < np.inf:
            k = _polish_active(prob, k, tol)
            slack = min_eig_hermitian(w * k)
        if slack < best_slack:
            best_slack, best_k = slack, k
        if best_slack < -2e-6 or abs(best_slack) <= 0.5 * tol.psd_tol:
            break
    return best_k, float(best_slack)


def _project_affine_gamma(k, w, gamma):
    """Exact projection of a unit-diagonal Hermitian matrix onto the affine
    set { sum_j W_ij gamma_j K_ij = 0 for all i } (diagonal held fixed)."""
    n = k.shape[0]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if not pairs:
        return k
    x = np.empty(2 * len(pairs))
    for t, (i, j) in enumerate(pairs):
        x[2 * t] = k[i, j].real
        x[2 * t + 1] = k[i, j].imag
    a = np.zeros((2 * n, 2 * len(pairs)))
    b = np.zeros(2 * n)
    for i in range(n):
        c_diag = w[i, i] * gamma[i] * k[i, i]
        b[2 * i] = -c_diag.real
        b[2 * i + 1] = -c_diag.imag
        for t, (p, q) in enumerate(pairs):
            if p == i:
                c = w[i, q] * gamma[q]  # coefficient of K_iq
                a[2 * i, 2 * t] += c.real
                a[2 * i, 2 * t + 1] += -c.imag
                a[2 * i + 1, 2 * t] += c.imag
                a[2 * i + 1, 2 * t + 1] += c.real
            elif q == i:
                c = w[i, p] * gamma[p]  # coefficient of K_ip = conj(K_pi)
                a[2 * i, 2 * t] += c.real
                a[2 * i, 2 * t + 1] += c.imag
                a[2 * i + 1, 2 * t] += c.imag
                a[2 * i + 1, 2 * t + 1] += -c.real
    correction = np.linalg.pinv(a, rcond=1e-12) @ (a @ x - b)
    x = x - correction
    out = k.copy()
    for t, (i, j) in enumerate(pairs):
        out[i, j] = x[2 * t] + 1j * x[2 * t + 1]
        out[j, i] = np.conj(out[i, j])
    return out


def _polish_active(prob: PickProblem, k, tol: Tolerances, iters: int = 600):
    """Alternating projections driving the slack to zero while staying
    admissible: refresh the null direction, pin it by an exact affine
    projection, then clip the three PSD constraints."""
    e1, e2, w = prob.coeff_matrices()
    k = _hermitize(np.array(k, dtype=np.complex128))
    floor = 3.0 * tol.psd_tol
    w_safe = np.where(np.abs(w) > 1e-12, w, 1.0)
    w_mask = np.abs(w) > 1e-12
    for it in range(iters):
        mw = w * k
        lw, vw = np.linalg.eigh(_hermitize(mw))
        gamma = vw[:, 0]
        k = _project_affine_gamma(k, w, gamma)
        for e in (e1, e2):
            m = e * k
            m2 = _psd_clip(m)
            k = k + (m2 - m) / e
        m = w * k
        m2 = _psd_clip(m)
        k = np.where(w_mask, k + (m2 - m) / w_safe, k)
        k = _hermitize(k)
        lk, vk = np.linalg.eigh(k)
        if lk[0] < floor:
            k = (vk * np.maximum(lk, floor)) @ vk.conj().T
        d = np.sqrt(np.maximum(np.real(np.diagonal(k)), 1e-12))
        k = k * np.outer(1.0 / d, 1.0 / d)
        if it >= 20 and it % 10 == 0:
            slack = min_eig_hermitian(w * k)
            r1 = min_eig_hermitian(e1 * k)
            r2 = min_eig_hermitian(e2 * k)
            if abs(slack) <= 0.5 * tol.psd_tol and min(r1, r2) >= -0.5 * tol.psd_tol:
                break
    return _hermitize(k)


def check_solvable(prob: PickProblem, tol: Tolerances = DEFAULT_TOL,
                   seed: int = 0) -> SolvabilityReport:
    """Decide solvability, returning the dual decomposition or an
    adversarial admissible kernel.

    Solvable: PSD (Gamma1, Gamma2) reproducing 1 - w_i conj(w_j) entrywise
    against the node coefficient matrices.  Unsolvable: an admissible K
    whose value Pick matrix has an eigenvalue below -1e-6.
    """
    e1, e2, w = prob.coeff_matrices()
    g1, g2, resid, its = _run_decomposition(e1, e2, w)
    if g1 is not None:
        return SolvabilityReport(
            solvable=True, gamma1=g1, gamma2=g2,
            decomposition_residual=resid, adversarial=None, iterations=its,
        )
    k, slack = search_active_kernel(prob, tol, restarts=20, iters=2000, seed=seed,
                                    polish=False)
    if k is not None and slack < -1e-6:
        kernel = admissibility(k, prob, tol)
        return SolvabilityReport(
            solvable=False, gamma1=None, gamma2=None,
            decomposition_residual=resid, adversarial=kernel, iterations=its,
        )
    raise Inconclusive(
        f"decomposition residual {resid:.3e}, best adversarial slack {slack:.3e}"
    )


def _decide_solvable(prob: PickProblem, values) -> bool:
    """Fast decomposition-only decision used inside the norm bisection."""
    e1, e2, w = prob.coeff_matrices(values)
    g1, _, _, _ = _run_decomposition(e1, e2, w, max_chunks=16)
    return g1 is not None


def extremal_rho(prob: PickProblem, tol: Tolerances = DEFAULT_TOL) -> float:
    """Smallest interpolant norm, by bisection over rescaled values."""
    maxw = max(abs(v) for v in prob.values)
    if maxw == 0.0:
        return 0.0
    values = np.array(prob.values, dtype=np.complex128)
    if not _decide_solvable(prob, values):
        raise ValueError("problem is not solvable; extremal norm exceeds one")
    if _decide_solvable(prob, values / maxw):
        return maxw
    lo, hi = maxw, 1.0
    while hi - lo > tol.bisect_tol:
        mid = 0.5 * (lo + hi)
        if _decide_solvable(prob, values / mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ActiveKernel:
    """Admissible kernel whose value Pick matrix is singular PSD."""

    kernel: KernelMatrix
    gamma: np.ndarray
    slack: float


def find_active_kernel(prob: PickProblem, tol: Tolerances = DEFAULT_TOL,
                       seed: int = 0, restarts: int = 20,
                       check_extremality: bool = True) -> ActiveKernel:
    """Locate an active kernel for an extremal problem.

    Refuses when the problem is not extremal; NoActiveKernelFound when the
    search exhausts its restarts without driving the slack to zero while
    keeping admissibility (which Lemma-level theory rules out for genuinely
    extremal data at this scale).
    """
    if check_extremality:
        rho = extremal_rho(prob, tol)
        if abs(rho - 1.0) > 2 * tol.bisect_tol:
            raise NotExtremal(f"minimal interpolant norm is {rho:.6f}, not 1")
    _, _, w = prob.coeff_matrices()
    best = None
    for round_seed in range(restarts):
        k, slack = search_active_kernel(
            prob, tol, restarts=4, iters=1500, seed=seed + 7919 * round_seed
        )
        if k is None:
            continue
        mw = _hermitize(w * k)
        lw, vw = np.linalg.eigh(mw)
        gamma = vw[:, 0]
        null_resid = float(np.linalg.norm(mw @ gamma))
        try:
            kernel = admissibility(k, prob, tol)
        except NotPositiveDefinite:
            continue
        ok = (
            kernel.admissible
            and abs(lw[0]) <= tol.psd_tol
            and null_resid <= 1e-6
        )
        if ok:
            gamma = _normalize_gamma(gamma)
            return ActiveKernel(kernel=kernel, gamma=gamma, slack=float(lw[0]))
        if best is None or abs(lw[0]) < abs(best[1]):
            best = (k, lw[0])
    raise NoActiveKernelFound(
        f"no active kernel within tolerance after {restarts} restarts "
        f"(best slack {best[1]:.3e})" if best else "search produced no admissible iterate"
    )


def _normalize_gamma(gamma):
    gamma = gamma / np.linalg.norm(gamma)
    for g in gamma:
        if abs(g) > 1e-8:
            gamma = gamma * (np.conj(g) / abs(g))
            break
    return gamma


def check_minimal(prob: PickProblem, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True when no delete-one-node subproblem is itself extremal."""
    if prob.N < 2:
        raise ValueError("minimality needs at least two nodes")
    rho = extremal_rho(prob, tol)
    if abs(rho - 1.0) > 2 * tol.bisect_tol:
        raise NotExtremal(f"minimal interpolant norm is {rho:.6f}, not 1")
    for i in range(prob.N):
        if extremal_rho(prob.drop_node(i), tol) >= 1.0 - tol.bisect_tol:
            return False
    return True


# ---------------------------------------------------------------------------
# kernel extension to a distinguished variety


@dataclass(frozen=True)
class ExtendedKernel:
    """Continuous admissible extension of an active kernel to a realized
    distinguished variety through the nodes.

    The defect field u(z, w) spans the output-side null direction of the
    colligation system at each variety point, normalized to
    ||u||^2 = 1 - |z|^2 and pinned to the stored node vectors at the nodes;
    the extended kernel is K(p, q) = <u(q), u(p)> / (1 - z_p conj(z_q)).
    """

    base: ActiveKernel
    prob: PickProblem
    colligation: Colligation
    variety: VarietyRealization
    node_u1: np.ndarray
    node_u2: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, compare=False)

    def defect_vector_at(self, z: complex, w: complex) -> np.ndarray:
        for j, (a, b) in enumerate(self.prob.nodes):
            if abs(z - a) + abs(w - b) < 1e-11:
                return self.node_u1[:, j].copy()
        col = self.colligation
        d1 = col.m
        top = np.hstack([col.A - w * np.eye(d1), z * col.B])
        bot = np.hstack([col.C, z * col.D - np.eye(col.n)])
        system = np.vstack([top, bot])
        _, s, vh = np.linalg.svd(system)
        if s[-2] < 1e-8:
            raise NullSpaceDegenerate(
                f"null space is two-dimensional near ({z}, {w})"
            )
        vec = vh.conj().T[:, -1]
        u = np.conj(vec[:d1])
        norm = np.linalg.norm(u)
        if norm < 1e-10:
            raise NullSpaceDegenerate("output-side component of the null vector vanishes")
        u = u * (np.sqrt(max(1.0 - abs(z) ** 2, 0.0)) / norm)
        i = int(np.argmax(np.abs(u)))
        u = u * (np.conj(u[i]) / abs(u[i]))
        return u

    def kernel_value(self, p, q) -> complex:
        """Extended kernel at a pair of variety points p = (z, w)."""
        up = self.defect_vector_at(*p)
        uq = self.defect_vector_at(*q)
        return complex(np.vdot(up, uq) / (1.0 - p[0] * np.conj(q[0])))

    def kernel_against_nodes(self, p) -> np.ndarray:
        up = self.defect_vector_at(*p)
        lam1 = np.array([a for a, _ in self.prob.nodes])
        return (up.conj() @ self.node_u1) / (1.0 - p[0] * np.conj(lam1))


def extend_kernel(ak: ActiveKernel, prob: PickProblem,
                  tol: Tolerances = DEFAULT_TOL) -> ExtendedKernel:
    """Extend an active kernel to a distinguished variety through the nodes.

    The admissibility Grams are factored into defect vectors; the isometric
    correspondence on conjugated node coordinates completes to a unitary
    whose entrywise conjugate realizes a variety containing the nodes.
    """
    k = ak.kernel.K
    e1, e2, _ = prob.coeff_matrices()
    lam1 = np.array([a for a, _ in prob.nodes])
    lam2 = np.array([b for _, b in prob.nodes])
    u1, d1 = _gram_factor(e1 * k, tol)
    u2, d2 = _gram_factor(e2 * k, tol)
    x = np.vstack([u1, np.conj(lam1)[None, :] * u2])
    y = np.vstack([np.conj(lam2)[None, :] * u1, u2])
    u_conj_side = complete_to_unitary(x, y, tol)
    col = Colligation(m=d1, n=d2, U=np.conj(u_conj_side), tol=tol)
    variety = VarietyRealization(col=col, tol=tol)
    return ExtendedKernel(
        base=ak, prob=prob, colligation=col, variety=variety,
        node_u1=u1, node_u2=u2, tol=tol,
    )


def uniqueness_value(ek: ExtendedKernel, prob: PickProblem, gamma, query) -> complex:
    """Value forced at a variety point by every norm-one interpolant.

    Ratio of the two kernel sums against the nodes; DegenerateFormula when
    the denominator collapses relative to the term magnitudes (the case
    minimality rules out).
    """
    z, w = complex(query[0]), complex(query[1])
    res = membership(ek.variety, z, w)
    if not res.inside:
        raise ValueError(f"query point is not on the variety (residual {res.residual:.3e})")
    kvec = ek.kernel_against_nodes((z, w))
    gamma = np.asarray(gamma, dtype=np.complex128)
    wbar = np.conj(np.array(prob.values, dtype=np.complex128))
    numerator = np.sum(kvec * gamma)
    denominator = np.sum(wbar * kvec * gamma)
    scale = np.sum(np.abs(kvec * gamma))
    if abs(denominator) <= 1e-9 * scale:
        raise DegenerateFormula("denominator vanishes relative to term size")
    return complex(numerator / denominator)
