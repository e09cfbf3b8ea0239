"""Distinguished varieties cut out by det(transfer(z) - w I) = 0.

Membership, fibers, boundary traces on the unit circle, the audit that a
realized curve exits the bidisk through the torus, and zero counting of
regular rational inner functions by the argument principle applied to the
branch product (which is single-valued because it is symmetric in the
branches).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import match_branches
from .errors import EmptyVariety, NotRegular, TraceUnstable, ZeroOnBoundary
from .linalg import DEFAULT_TOL, Tolerances, operator_norm
from .polynomials import Poly2
from .realization import Colligation, eval_transfer, transfer_eigenvalues


def interior_grid(size: int, radius: float = 0.9) -> np.ndarray:
    """Deterministic spiral of `size` points filling |z| <= radius."""
    k = np.arange(size)
    r = radius * np.sqrt((k + 0.5) / size)
    golden = np.pi * (3.0 - np.sqrt(5.0))
    return r * np.exp(1j * golden * k)


@dataclass(frozen=True)
class VarietyRealization:
    """A distinguished-variety candidate {(z, w) in D^2 : det(psi(z) - wI) = 0}.

    Construction verifies on a 16-point interior grid that the curve meets
    the open bidisk at all; a transfer function without eigenvalues inside
    the disk (e.g. a constant unitary) realizes the empty set and is
    rejected with EmptyVariety.
    """

    col: Colligation
    tol: Tolerances = field(default=DEFAULT_TOL, compare=False)

    def __post_init__(self):
        eigs = transfer_eigenvalues(self.col, interior_grid(16, radius=0.9))
        if np.abs(eigs).min() >= 1.0 - 1e-8:
            raise EmptyVariety("no interior grid fiber meets the open bidisk")

    @property
    def rank(self) -> tuple:
        return (self.col.m, self.col.n)


@dataclass(frozen=True)
class MembershipResult:
    inside: bool
    residual: float


def membership(v: VarietyRealization, z: complex, w: complex) -> MembershipResult:
    """Scaled determinant test for (z, w) in the realized variety."""
    if abs(z) >= 1.0 or abs(w) >= 1.0:
        raise ValueError("membership is defined on the open bidisk")
    psi = eval_transfer(v.col, z).psi
    m = v.col.m
    det = np.linalg.det(psi - w * np.eye(m))
    residual = abs(det) / (1.0 + operator_norm(psi)) ** m
    return MembershipResult(inside=bool(residual <= v.tol.membership_tol), residual=float(residual))


def fibers_over_z(v: VarietyRealization, z: complex) -> np.ndarray:
    """The m eigenvalues of the transfer function over z (with multiplicity)."""
    if abs(z) > 1 + 1e-12:
        raise ValueError("fibers are defined over the closed disk")
    return np.sort_complex(transfer_eigenvalues(v.col, np.array([z]))[0])


@dataclass(frozen=True)
class BoundaryTrace:
    """Branches of the variety over the unit circle on a uniform grid.

    Row t of `branches` is the eigenvalue multiset of the transfer function
    at e^{i thetas[t]}, ordered so consecutive rows match by minimal total
    displacement.  The wrap-around step is excluded from continuity_defect:
    branches may permute after a full loop (monodromy).
    """

    thetas: np.ndarray
    branches: np.ndarray
    continuity_defect: float


def _raw_trace(col: Colligation, g: int):
    thetas = 2.0 * np.pi * np.arange(g) / g
    raw = transfer_eigenvalues(col, np.exp(1j * thetas))
    matched, defect = match_branches(raw)
    return thetas, matched, float(defect)


def boundary_trace(v: VarietyRealization, g: int, verify: bool = True) -> BoundaryTrace:
    """Trace the boundary branches on a g-point circle grid.

    With verify=True the trace is recomputed at 2g (and 4g) to confirm the
    continuity defect shrinks under refinement; TraceUnstable otherwise.
    """
    if g < 64:
        raise ValueError("boundary trace needs a grid of at least 64 points")
    thetas, branches, defect = _raw_trace(v.col, g)
    if verify and defect > 1e-12:
        _, _, defect2 = _raw_trace(v.col, 2 * g)
        if defect2 >= defect:
            _, _, defect4 = _raw_trace(v.col, 4 * g)
            if defect4 >= defect2:
                raise TraceUnstable(
                    f"continuity defect did not decrease under refinement: "
                    f"{defect:.3e} -> {defect2:.3e} -> {defect4:.3e}"
                )
    return BoundaryTrace(thetas=thetas, branches=branches, continuity_defect=defect)


@dataclass(frozen=True)
class AuditReport:
    is_distinguished: bool
    worst_interior_modulus: float
    worst_boundary_deviation: float


def audit_distinguished(v: VarietyRealization, interior_grid_size: int, g: int) -> AuditReport:
    """Check the defining exit property on sampled data.

    Interior fibers over |z| <= 0.95 must stay strictly inside the disk and
    every boundary branch must sit on the unit circle to 1e-6.
    """
    if interior_grid_size < 16 or g < 16:
        raise ValueError("grid sizes must be at least 16")
    grid = interior_grid(interior_grid_size, radius=0.95)
    eigs = transfer_eigenvalues(v.col, grid)
    moduli = np.abs(eigs)
    if moduli.min() >= 1.0 - 1e-8:
        raise EmptyVariety("all interior fibers avoid the open bidisk")
    worst_interior = float(moduli.max())
    trace = boundary_trace(v, max(g, 64))
    worst_boundary = float(np.abs(np.abs(trace.branches) - 1.0).max())
    return AuditReport(
        is_distinguished=bool(worst_interior < 1.0 and worst_boundary < 1e-6),
        worst_interior_modulus=worst_interior,
        worst_boundary_deviation=worst_boundary,
    )


# ---------------------------------------------------------------------------
# regular rational inner functions and zero counting


@dataclass(frozen=True)
class RationalInner:
    """phi = (reflection of p) / p for a polynomial p zero-free on the
    closed bidisk, with declared degree d = (d1, d2).

    The reflection of p at degree d has coefficients conj(c[i, j]) at
    exponent (d1 - i, d2 - j), so phi is unimodular on the torus.
    """

    p: Poly2
    d: tuple

    def __post_init__(self):
        d1, d2 = int(self.d[0]), int(self.d[1])
        object.__setattr__(self, "d", (d1, d2))
        pd1, pd2 = self.p.degree
        if pd1 > d1 or pd2 > d2:
            raise NotRegular("declared degree is below the degree of p")
        _check_regularity(self.p)

    @property
    def numerator(self) -> Poly2:
        d1, d2 = self.d
        return Poly2(tuple((d1 - i, d2 - j, np.conj(c)) for i, j, c in self.p.coeffs))

    def __call__(self, z, w):
        return self.numerator(z, w) / self.p(z, w)


def monomial_inner(d1: int, d2: int) -> RationalInner:
    """The inner function z^{d1} w^{d2}."""
    return RationalInner(p=Poly2(((0, 0, 1.0),)), d=(d1, d2))


def _check_regularity(p: Poly2):
    """Grid minimum of |p| over the closed bidisk, boundary refined."""
    if not p.coeffs:
        raise NotRegular("zero polynomial")
    top = max(abs(c) for _, _, c in p.coeffs)
    radii = np.array([0.0, 0.25, 0.5, 0.75, 0.9, 1.0])
    angles = np.exp(2j * np.pi * np.arange(64) / 64)
    zs = np.unique((radii[:, None] * angles[None, :]).ravel())
    lo = np.abs(p(zs[:, None], zs[None, :])).min()
    # refined pass on the torus, where inner-function degeneracies live
    fine = np.exp(2j * np.pi * np.arange(256) / 256)
    lo = min(lo, np.abs(p(fine[:, None], fine[None, :])).min())
    if lo <= 1e-6 * top:
        raise NotRegular(f"|p| dips to {lo:.3e} on the closed bidisk")


def _phase_increments(vals: np.ndarray) -> np.ndarray:
    """Wrapped phase steps of a nonvanishing cyclic sequence."""
    rotated = np.roll(vals, -1)
    return np.angle(rotated / vals)


def count_zeroes(v: VarietyRealization, phi: RationalInner, g: int) -> int:
    """Number of zeroes of phi on the variety, counted with multiplicity.

    Computes the winding number of the product of phi over all boundary
    branches; the grid is doubled until consecutive phase steps stay below
    pi/4 everywhere.
    """
    if g < 64:
        raise ValueError("zero counting needs a grid of at least 64 points")
    grid = g
    while True:
        trace = boundary_trace(v, grid)
        zs = np.exp(1j * trace.thetas)
        vals = phi(zs[:, None], trace.branches)
        if np.abs(vals).min() <= 1e-4:
            raise ZeroOnBoundary(
                f"|phi| reaches {np.abs(vals).min():.3e} on the boundary trace"
            )
        prod = np.prod(vals, axis=1)
        steps = _phase_increments(prod)
        if np.abs(steps).max() < np.pi / 4:
            total = steps.sum() / (2.0 * np.pi)
            return int(np.rint(total))
        if grid >= 2 ** 18:
            raise TraceUnstable("phase steps did not settle under grid refinement")
        grid *= 2
