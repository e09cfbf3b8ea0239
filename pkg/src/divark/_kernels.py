"""Hot numeric loops, JIT-compiled when numba is enabled.

Every kernel has a pure-numpy twin with identical semantics.  The numba
path is the default; set DIVARK_NUMBA=0 to force the numpy fallback
(useful for debugging and as the baseline in benchmarks/bench_kernels.py).
"""

from __future__ import annotations

import os

import numpy as np

_env = os.environ.get("DIVARK_NUMBA", "1").strip().lower()
_WANT_NUMBA = _env not in ("0", "false", "no", "off")

if _WANT_NUMBA:
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False

if not NUMBA_ENABLED:
    def njit(*args, **kwargs):  # pragma: no cover - trivial shim
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


# ---------------------------------------------------------------------------
# transfer-function eigenvalue sweep


def _eig_sweep_impl(A, B, C, D, zs):
    m = A.shape[0]
    n = D.shape[0]
    out = np.empty((zs.shape[0], m), dtype=np.complex128)
    eye_n = np.eye(n, dtype=np.complex128)
    for t in range(zs.shape[0]):
        z = zs[t]
        x = np.linalg.solve(eye_n - z * D, C)
        psi = A + z * (B @ x)
        out[t, :] = np.linalg.eigvals(psi)
    return out


_eig_sweep_numba = njit(cache=True)(_eig_sweep_impl)


def eig_sweep(A, B, C, D, zs):
    """Eigenvalues of A + z B (I - z D)^{-1} C for every z in zs.

    Returns an (len(zs), m) array; row order follows zs, column order is
    whatever the eigenvalue solver produced (match branches separately).
    """
    A = np.ascontiguousarray(A, dtype=np.complex128)
    B = np.ascontiguousarray(B, dtype=np.complex128)
    C = np.ascontiguousarray(C, dtype=np.complex128)
    D = np.ascontiguousarray(D, dtype=np.complex128)
    zs = np.ascontiguousarray(zs, dtype=np.complex128)
    if NUMBA_ENABLED:
        return _eig_sweep_numba(A, B, C, D, zs)
    return _eig_sweep_impl(A, B, C, D, zs)


# ---------------------------------------------------------------------------
# branch matching along a path of eigenvalue multisets


def _match_exhaustive_impl(raw, perms):
    g, m = raw.shape
    out = np.empty_like(raw)
    out[0, :] = raw[0, :]
    defect = 0.0
    for t in range(1, g):
        best = 1e300
        best_p = 0
        for p in range(perms.shape[0]):
            tot = 0.0
            for k in range(m):
                tot += abs(raw[t, perms[p, k]] - out[t - 1, k])
            if tot < best:
                best = tot
                best_p = p
        step = 0.0
        for k in range(m):
            v = raw[t, perms[best_p, k]]
            out[t, k] = v
            d = abs(v - out[t - 1, k])
            if d > step:
                step = d
        if step > defect:
            defect = step
    return out, defect


def _match_greedy_impl(raw):
    g, m = raw.shape
    out = np.empty_like(raw)
    out[0, :] = raw[0, :]
    used = np.zeros(m, dtype=np.bool_)
    defect = 0.0
    for t in range(1, g):
        used[:] = False
        step = 0.0
        for k in range(m):
            best = 1e300
            best_j = -1
            for j in range(m):
                if used[j]:
                    continue
                d = abs(raw[t, j] - out[t - 1, k])
                if d < best:
                    best = d
                    best_j = j
            used[best_j] = True
            out[t, k] = raw[t, best_j]
            if best > step:
                step = best
        if step > defect:
            defect = step
    return out, defect


_match_exhaustive_numba = njit(cache=True)(_match_exhaustive_impl)
_match_greedy_numba = njit(cache=True)(_match_greedy_impl)


def _permutation_table(m: int) -> np.ndarray:
    import itertools

    return np.array(list(itertools.permutations(range(m))), dtype=np.int64)


def match_branches(raw):
    """Reorder each row of raw so branches vary continuously along rows.

    Exhaustive minimal-total-displacement assignment for m <= 6, greedy
    nearest-neighbour above that.  Returns (matched array, defect), where
    defect is the largest per-branch step between consecutive rows.
    """
    raw = np.ascontiguousarray(raw, dtype=np.complex128)
    m = raw.shape[1]
    if raw.shape[0] < 2 or m == 1:
        return raw.copy(), (
            0.0 if raw.shape[0] < 2 else float(np.abs(np.diff(raw[:, 0])).max())
        )
    if m <= 6:
        perms = _permutation_table(m)
        if NUMBA_ENABLED:
            return _match_exhaustive_numba(raw, perms)
        return _match_exhaustive_impl(raw, perms)
    if NUMBA_ENABLED:
        return _match_greedy_numba(raw)
    return _match_greedy_impl(raw)


# ---------------------------------------------------------------------------
# Dykstra projection for the two-term PSD decomposition
#
# Feasibility problem: find Hermitian PSD G1, G2 with
#     E1 * G1 + E2 * G2 == F   (entrywise),
# where E1, E2, F are Hermitian data matrices.  Alternates the exact
# projection onto the affine constraint with the projection onto the
# PSD x PSD cone, carrying the Dykstra correction on the cone step only
# (the affine set needs none).


def _dykstra_impl(E1, E2, F, g1, g2, p1, p2, iters, conv_tol):
    s1 = np.abs(E1) ** 2 + np.abs(E2) ** 2
    scale = 1.0 + np.abs(F).max()
    resid = 1e300
    it = 0
    while it < iters:
        # exact projection onto {E1*G1 + E2*G2 == F}, entrywise
        mu = (E1 * g1 + E2 * g2 - F) / s1
        a1 = g1 - np.conj(E1) * mu
        a2 = g2 - np.conj(E2) * mu
        # PSD projection with Dykstra correction
        w1 = a1 + p1
        w2 = a2 + p2
        w1 = (w1 + w1.conj().T) / 2.0
        w2 = (w2 + w2.conj().T) / 2.0
        l1, v1 = np.linalg.eigh(w1)
        l2, v2 = np.linalg.eigh(w2)
        g1 = (v1 * np.maximum(l1, 0.0)) @ v1.conj().T
        g2 = (v2 * np.maximum(l2, 0.0)) @ v2.conj().T
        p1 = w1 - g1
        p2 = w2 - g2
        resid = max(np.abs(g1 - a1).max(), np.abs(g2 - a2).max()) / scale
        it += 1
        if resid <= conv_tol:
            return g1, g2, p1, p2, resid, it, True
    return g1, g2, p1, p2, resid, it, False


_dykstra_numba = njit(cache=True)(_dykstra_impl)


class DykstraState:
    """Warm-startable alternating-projection state for one decomposition."""

    def __init__(self, E1, E2, F):
        n = F.shape[0]
        self.E1 = np.ascontiguousarray(E1, dtype=np.complex128)
        self.E2 = np.ascontiguousarray(E2, dtype=np.complex128)
        self.F = np.ascontiguousarray(F, dtype=np.complex128)
        self.g1 = np.zeros((n, n), dtype=np.complex128)
        self.g2 = np.zeros((n, n), dtype=np.complex128)
        self.p1 = np.zeros((n, n), dtype=np.complex128)
        self.p2 = np.zeros((n, n), dtype=np.complex128)
        self.resid = np.inf
        self.iterations = 0
        self.converged = False

    def run(self, iters, conv_tol=1e-10):
        fn = _dykstra_numba if NUMBA_ENABLED else _dykstra_impl
        out = fn(self.E1, self.E2, self.F, self.g1, self.g2, self.p1, self.p2,
                 iters, conv_tol)
        self.g1, self.g2, self.p1, self.p2, self.resid, done, self.converged = (
            out[0], out[1], out[2], out[3], out[4], out[5], out[6]
        )
        self.iterations += int(done)
        return self


# ---------------------------------------------------------------------------
# projected-subgradient search over admissible kernels
#
# Minimise lambda_min(W * K) over unit-diagonal K = L L^* subject to the
# two coordinate PSD constraints E1 * K >= 0, E2 * K >= 0 (enforced by
# penalty).  Returns the best penalty-feasible iterate seen.


def _row_normalize(L):
    n = L.shape[0]
    for i in range(n):
        s = 0.0
        for k in range(L.shape[1]):
            s += abs(L[i, k]) ** 2
        s = np.sqrt(s)
        if s > 0:
            for k in range(L.shape[1]):
                L[i, k] = L[i, k] / s
    return L


_row_normalize_numba = njit(cache=True)(_row_normalize)


def _subgrad_impl(E1, E2, W, L, iters, step0, beta, feas_tol, pd_floor):
    n = L.shape[0]
    best_slack = 1e300
    best_K = L @ L.conj().T
    for t in range(iters):
        K = L @ L.conj().T
        K = (K + K.conj().T) / 2.0
        lw, vw = np.linalg.eigh(W * K)
        l1, v1 = np.linalg.eigh(E1 * K)
        l2, v2 = np.linalg.eigh(E2 * K)
        lk, vk = np.linalg.eigh(K)
        if l1[0] >= -feas_tol and l2[0] >= -feas_tol and lk[0] > pd_floor:
            if lw[0] < best_slack:
                best_slack = lw[0]
                best_K = K.copy()
        q = vw[:, 0]
        grad = np.outer(np.conj(q), q) * W
        if l1[0] < feas_tol:
            q1 = v1[:, 0]
            grad = grad - beta * (np.outer(np.conj(q1), q1) * E1)
        if l2[0] < feas_tol:
            q2 = v2[:, 0]
            grad = grad - beta * (np.outer(np.conj(q2), q2) * E2)
        if lk[0] < 10.0 * pd_floor:
            qk = vk[:, 0]
            grad = grad - beta * np.outer(np.conj(qk), qk)
        gl = np.conj(grad) @ L
        gn = np.sqrt(np.sum(np.abs(gl) ** 2))
        if gn < 1e-15:
            break
        L = L - (step0 / np.sqrt(1.0 + t)) * gl / gn
        L = _row_normalize(L)
    return best_K, best_slack


def _subgrad_impl_numba_body(E1, E2, W, L, iters, step0, beta, feas_tol, pd_floor):
    n = L.shape[0]
    best_slack = 1e300
    best_K = L @ L.conj().T
    for t in range(iters):
        K = L @ L.conj().T
        K = (K + K.conj().T) / 2.0
        lw, vw = np.linalg.eigh(W * K)
        l1, v1 = np.linalg.eigh(E1 * K)
        l2, v2 = np.linalg.eigh(E2 * K)
        lk, vk = np.linalg.eigh(K)
        if l1[0] >= -feas_tol and l2[0] >= -feas_tol and lk[0] > pd_floor:
            if lw[0] < best_slack:
                best_slack = lw[0]
                best_K = K.copy()
        q = vw[:, 0]
        grad = np.outer(np.conj(q), q) * W
        if l1[0] < feas_tol:
            q1 = v1[:, 0]
            grad = grad - beta * (np.outer(np.conj(q1), q1) * E1)
        if l2[0] < feas_tol:
            q2 = v2[:, 0]
            grad = grad - beta * (np.outer(np.conj(q2), q2) * E2)
        if lk[0] < 10.0 * pd_floor:
            qk = vk[:, 0]
            grad = grad - beta * np.outer(np.conj(qk), qk)
        gl = np.conj(grad) @ L
        gn = np.sqrt(np.sum(np.abs(gl) ** 2))
        if gn < 1e-15:
            break
        L = L - (step0 / np.sqrt(1.0 + t)) * gl / gn
        L = _row_normalize_numba(L)
    return best_K, best_slack


_subgrad_numba = njit(cache=True)(_subgrad_impl_numba_body)


def subgrad_search(E1, E2, W, L0, iters=1500, step0=0.15, beta=25.0,
                   feas_tol=1e-11, pd_floor=1e-9):
    """One subgradient run from L0; returns (best admissible K, its slack)."""
    E1 = np.ascontiguousarray(E1, dtype=np.complex128)
    E2 = np.ascontiguousarray(E2, dtype=np.complex128)
    W = np.ascontiguousarray(W, dtype=np.complex128)
    L0 = np.ascontiguousarray(L0, dtype=np.complex128)
    L0 = _row_normalize(L0.copy())
    if NUMBA_ENABLED:
        return _subgrad_numba(E1, E2, W, L0, iters, step0, beta, feas_tol, pd_floor)
    return _subgrad_impl(E1, E2, W, L0, iters, step0, beta, feas_tol, pd_floor)
