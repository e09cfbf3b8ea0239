"""Bivariate polynomials with complex coefficients.

Coefficients are stored sparsely as {(i, j): c} for the monomial z^i w^j.
The torus-grid evaluation goes through a zero-padded 2-d FFT, which is
exact at the grid points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Poly2:
    """Polynomial in two complex variables."""

    coeffs: tuple

    def __post_init__(self):
        cleaned = []
        seen = set()
        for i, j, c in self.coeffs:
            i, j, c = int(i), int(j), complex(c)
            if i < 0 or j < 0:
                raise ValueError("exponents must be nonnegative")
            if (i, j) in seen:
                raise ValueError(f"duplicate exponent pair {(i, j)}")
            seen.add((i, j))
            if c != 0:
                cleaned.append((i, j, c))
        cleaned.sort(key=lambda t: (t[0], t[1]))
        object.__setattr__(self, "coeffs", tuple(cleaned))

    @classmethod
    def from_dict(cls, d: dict) -> "Poly2":
        return cls(tuple((i, j, c) for (i, j), c in d.items()))

    @property
    def degree(self) -> tuple:
        if not self.coeffs:
            return (0, 0)
        return (max(i for i, _, _ in self.coeffs), max(j for _, j, _ in self.coeffs))

    def coeff_matrix(self) -> np.ndarray:
        d1, d2 = self.degree
        m = np.zeros((d1 + 1, d2 + 1), dtype=np.complex128)
        for i, j, c in self.coeffs:
            m[i, j] = c
        return m

    def __call__(self, z, w):
        z = np.asarray(z, dtype=np.complex128)
        w = np.asarray(w, dtype=np.complex128)
        out = np.zeros(np.broadcast(z, w).shape, dtype=np.complex128)
        for i, j, c in self.coeffs:
            out = out + c * z**i * w**j
        return out if out.shape else complex(out)

    def __mul__(self, other: "Poly2") -> "Poly2":
        acc: dict = {}
        for i1, j1, c1 in self.coeffs:
            for i2, j2, c2 in other.coeffs:
                key = (i1 + i2, j1 + j2)
                acc[key] = acc.get(key, 0.0) + c1 * c2
        return Poly2.from_dict(acc)

    def coeff_sum(self) -> float:
        return float(sum(abs(c) for _, _, c in self.coeffs))

    def eval_matrix_pair(self, t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
        """p(T1, T2) for commuting matrices, by direct monomial sums."""
        n = t1.shape[0]
        d1, d2 = self.degree
        pow1 = [np.eye(n, dtype=np.complex128)]
        for _ in range(d1):
            pow1.append(pow1[-1] @ t1)
        pow2 = [np.eye(n, dtype=np.complex128)]
        for _ in range(d2):
            pow2.append(pow2[-1] @ t2)
        out = np.zeros((n, n), dtype=np.complex128)
        for i, j, c in self.coeffs:
            out += c * (pow1[i] @ pow2[j])
        return out


def torus_grid_values(p: Poly2, g: int) -> np.ndarray:
    """Values of p on the g-by-g uniform torus grid, exact via FFT.

    Entry (a, b) is p(e^{2 pi i a / g}, e^{2 pi i b / g}).
    """
    d1, d2 = p.degree
    if g <= max(d1, d2):
        raise ValueError("grid must exceed the polynomial degrees")
    pad = np.zeros((g, g), dtype=np.complex128)
    for i, j, c in p.coeffs:
        pad[i, j] = c
    # fft computes sum c_ij e^{-2pi i (ai+bj)/g}; conjugate-coefficient trick
    # turns it into evaluation at e^{+2pi i a/g}
    return np.conj(np.fft.fft2(np.conj(pad)))


def circle_sup_in_w(p: Poly2, z: complex) -> float:
    """Exact sup of |p(z, w)| over |w| = 1, via critical points of |q|^2.

    q(w) = p(z, w) has degree d; |q(e^{it})|^2 is a trig polynomial whose
    derivative roots come from a degree-2d algebraic equation.
    """
    d1, d2 = p.degree
    q = np.zeros(d2 + 1, dtype=np.complex128)
    for i, j, c in p.coeffs:
        q[j] += c * z**i
    while q.size > 1 and q[-1] == 0:
        q = q[:-1]
    d = q.size - 1
    if d == 0:
        return float(abs(q[0]))
    # r_k = sum_j q_{j+k} conj(q_j) so that |q(e^{it})|^2 = sum_k r_k e^{ikt}
    r = np.array([np.sum(q[k:] * np.conj(q[: q.size - k])) for k in range(q.size)])
    # derivative of the trig poly: sum_{k=1..d} ik (r_k u^k - conj(r_k) u^-k),
    # times u^d it becomes an ordinary polynomial of degree 2d in u
    poly = np.zeros(2 * d + 1, dtype=np.complex128)  # descending powers
    for k in range(1, d + 1):
        poly[d - k] += 1j * k * r[k]          # u^{d+k}
        poly[d + k] += -1j * k * np.conj(r[k])  # u^{d-k}
    roots = np.roots(poly)
    candidates = roots[np.abs(np.abs(roots) - 1.0) < 1e-6]
    best = 0.0
    for u in np.concatenate([candidates / np.abs(candidates), [1.0 + 0j]]) if candidates.size else [1.0 + 0j]:
        val = abs(np.polyval(q[::-1], u))
        if val > best:
            best = val
    return float(best)
