"""From a pair of finite Blaschke products to a distinguished variety.

Multiplication by a finite Blaschke product is a pure isometry on the
Hardy space with finite-dimensional cokernel (the model space).  The
kernel identity that both model bases satisfy makes the correspondence

    (e(zeta), phi1(zeta) f(zeta))  |->  (phi2(zeta) e(zeta), f(zeta))

an isometry on its span, so it completes to a unitary colligation whose
variety contains every point (phi1(zeta), phi2(zeta)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankDeficientSamples
from .linalg import DEFAULT_TOL, Tolerances, numerical_rank
from .realization import Colligation, complete_to_unitary
from .variety import VarietyRealization, membership


@dataclass(frozen=True)
class BlaschkeProduct:
    """Finite Blaschke product c * prod (z - a_k) / (1 - conj(a_k) z)."""

    zeros: tuple
    unimodular_constant: complex = 1.0 + 0j

    def __post_init__(self):
        zs = tuple(complex(a) for a in self.zeros)
        if len(zs) < 1:
            raise ValueError("a Blaschke product needs at least one zero")
        if max(abs(a) for a in zs) >= 1.0 - 1e-9:
            raise ValueError("zeros must satisfy |a| < 1 - 1e-9")
        c = complex(self.unimodular_constant)
        if abs(abs(c) - 1.0) > 1e-12:
            raise ValueError("constant must be unimodular")
        object.__setattr__(self, "zeros", zs)
        object.__setattr__(self, "unimodular_constant", c)

    @property
    def degree(self) -> int:
        return len(self.zeros)

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        out = np.full(z.shape, self.unimodular_constant, dtype=np.complex128)
        for a in self.zeros:
            out = out * (z - a) / (1.0 - np.conj(a) * z)
        return out if out.shape else complex(out)


# ---------------------------------------------------------------------------
# Hardy-space inner products of rational functions, in closed form.
#
# A function is represented by numerator Taylor coefficients (ascending)
# over the denominator prod_l (1 - conj(a_l) z) with all |a_l| < 1.  The
# inner product sum_k u_k conj(v_k) of the Taylor coefficients is split
# into an explicit head plus a tail that solves a small Stein equation on
# the companion matrices of the two denominators; no quadrature anywhere.


def _den_coeffs(poles) -> np.ndarray:
    q = np.array([1.0 + 0j])
    for a in poles:
        q = np.convolve(q, np.array([1.0, -np.conj(a)]))
    return q


def _taylor(num, q, count) -> np.ndarray:
    num = np.asarray(num, dtype=np.complex128)
    out = np.zeros(count, dtype=np.complex128)
    for k in range(count):
        acc = num[k] if k < num.size else 0.0
        for j in range(1, min(k, q.size - 1) + 1):
            acc -= q[j] * out[k - j]
        out[k] = acc
    return out


def _companion(q) -> np.ndarray:
    n = q.size - 1
    f = np.zeros((n, n), dtype=np.complex128)
    for i in range(n - 1):
        f[i, i + 1] = 1.0
    for j in range(n):
        f[n - 1, j] = -q[n - j]
    return f


def h2_inner(num_u, poles_u, num_v, poles_v) -> complex:
    """<u, v> in H^2 for rational u, v with poles outside the closed disk."""
    qu = _den_coeffs(poles_u)
    qv = _den_coeffs(poles_v)
    k0 = max(len(np.atleast_1d(num_u)), len(np.atleast_1d(num_v)))
    nu, nv = qu.size - 1, qv.size - 1
    need = k0 + max(nu, nv, 1)
    tu = _taylor(num_u, qu, need)
    tv = _taylor(num_v, qv, need)
    head = np.sum(tu[:k0] * np.conj(tv[:k0]))
    if nu == 0 or nv == 0:
        # at least one side is a polynomial: the tail terminates inside head
        # provided k0 covers it, which it does by construction
        extra = np.sum(tu[k0:] * np.conj(tv[k0:]))
        return complex(head + extra)
    fu = _companion(qu)
    fv = _companion(qv)
    x = tu[k0: k0 + nu]
    y = tv[k0: k0 + nv]
    rhs = np.outer(x, np.conj(y))
    a = np.eye(nu * nv, dtype=np.complex128) - np.kron(np.conj(fv), fu)
    z = np.linalg.solve(a, rhs.reshape(-1, order="F")).reshape(nu, nv, order="F")
    return complex(head + z[0, 0])


@dataclass(frozen=True)
class RationalFn:
    """num(z) / prod (1 - conj(a) z), the closed form used for basis elements."""

    num: tuple
    poles: tuple

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        num = np.zeros(z.shape, dtype=np.complex128)
        for c in reversed(self.num):
            num = num * z + c
        den = np.ones(z.shape, dtype=np.complex128)
        for a in self.poles:
            den = den * (1.0 - np.conj(a) * z)
        out = num / den
        return out if out.shape else complex(out)


@dataclass(frozen=True)
class ModelBasis:
    """Orthonormal basis of the cokernel of multiplication by a Blaschke
    product, in Takenaka-Malmquist form (repeated zeros included: repeating
    the parameter produces the confluent chain)."""

    source: BlaschkeProduct
    functions: tuple

    @property
    def dim(self) -> int:
        return len(self.functions)

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.complex128)
        return np.stack([f(z) for f in self.functions])

    def gram(self) -> np.ndarray:
        g = np.empty((self.dim, self.dim), dtype=np.complex128)
        for i, fi in enumerate(self.functions):
            for j, fj in enumerate(self.functions):
                # entry (i, j) = <f_j, f_i>
                g[i, j] = h2_inner(fj.num, fj.poles, fi.num, fi.poles)
        return g


def model_space_basis(phi: BlaschkeProduct, validate: bool = True) -> ModelBasis:
    """Takenaka-Malmquist orthonormal basis of (phi H^2)^perp."""
    fns = []
    lead = np.array([1.0 + 0j])
    for j, a in enumerate(phi.zeros):
        num = np.sqrt(1.0 - abs(a) ** 2) * lead
        fns.append(RationalFn(num=tuple(num), poles=tuple(phi.zeros[: j + 1])))
        lead = np.convolve(lead, np.array([-a, 1.0]))
    basis = ModelBasis(source=phi, functions=tuple(fns))
    if validate:
        _validate_basis(basis)
    return basis


def _validate_basis(basis: ModelBasis, rng_seed: int = 118):
    g = basis.gram()
    err = np.abs(g - np.eye(basis.dim)).max()
    if err > 1e-10:
        raise AssertionError(f"model basis Gram deviates from I by {err:.3e}")
    phi = basis.source
    rng = np.random.default_rng(rng_seed)
    pts = 0.9 * np.sqrt(rng.uniform(size=20)) * np.exp(2j * np.pi * rng.uniform(size=20))
    phi_num = _blaschke_numerator(phi)
    for lam in pts:
        # phi * (Szego kernel at lam) has numerator phi_num and one extra pole
        for f in basis.functions:
            ip = h2_inner(f.num, f.poles, phi_num, tuple(phi.zeros) + (lam,))
            if abs(ip) > 1e-8:
                raise AssertionError(
                    f"basis element fails orthogonality to phi H^2: {abs(ip):.3e}"
                )


def _blaschke_numerator(phi: BlaschkeProduct) -> tuple:
    num = np.array([phi.unimodular_constant])
    for a in phi.zeros:
        num = np.convolve(num, np.array([-a, 1.0]))
    return tuple(num)


def szego_kernel(z, lam):
    """Reproducing kernel of H^2: 1 / (1 - z conj(lam))."""
    return 1.0 / (1.0 - np.asarray(z) * np.conj(lam))


def default_samples(count: int) -> np.ndarray:
    """Deterministic spanning sample points in the disk."""
    k = np.arange(count)
    radii = np.array([0.35, 0.55, 0.75])[k % 3]
    return radii * np.exp(2j * np.pi * k / count + 0.31j)


def colligation_from_inner_pair(
    phi1: BlaschkeProduct,
    phi2: BlaschkeProduct,
    samples=None,
    tol: Tolerances = DEFAULT_TOL,
) -> Colligation:
    """Build the unitary colligation joining the two model bases.

    The resulting transfer function satisfies
    psi(phi1(zeta)) e(zeta) = phi2(zeta) e(zeta), so zeta -> (phi1, phi2)
    maps the disk into the realized variety.
    """
    m, n = phi1.degree, phi2.degree
    if samples is None:
        samples = default_samples(2 * (m + n))
    samples = np.asarray(list(samples), dtype=np.complex128)
    if samples.size < m + n:
        raise RankDeficientSamples(f"need at least {m + n} samples, got {samples.size}")
    e_basis = model_space_basis(phi1, validate=False)
    f_basis = model_space_basis(phi2, validate=False)

    def stacks(zs):
        e = e_basis(zs)
        f = f_basis(zs)
        x = np.vstack([e, phi1(zs)[None, :] * f])
        y = np.vstack([phi2(zs)[None, :] * e, f])
        return x, y

    x, y = stacks(samples)
    sing = np.linalg.svd(x, compute_uv=False)
    rank = numerical_rank(sing, tol)
    x_aug, _ = stacks(np.concatenate([samples, default_samples(19)[-8:] * 0.93]))
    if numerical_rank(np.linalg.svd(x_aug, compute_uv=False), tol) > rank:
        raise RankDeficientSamples("sample points do not span the natural span")
    u = complete_to_unitary(x, y, tol)
    return Colligation(m=m, n=n, U=u, tol=tol)


def verify_pair_on_variety(
    phi1: BlaschkeProduct,
    phi2: BlaschkeProduct,
    v: VarietyRealization,
    trials: int,
    seed: int = 0,
) -> float:
    """Max membership residual of (phi1(zeta), phi2(zeta)) over random zeta."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        zeta = 0.95 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        res = membership(v, complex(phi1(zeta)), complex(phi2(zeta)))
        worst = max(worst, res.residual)
    return worst
