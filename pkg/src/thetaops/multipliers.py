"""Matrix factors of automorphy for vector theta functions.

A multiplier system of rank r and degree s assigns to the lattice point
n + Omega m the r x r factor

    e_{n + Omega m}(z) = exp(-s pi i <m, Omega m> - 2 s pi i <m, z>)
                         * A_1^{m_1} ... A_g^{m_g},

where the A_j are fixed pairwise-commuting nondegenerate matrices.  The
factors satisfy the cocycle identity

    e_lam(z + mu) e_mu(z) = e_mu(z + lam) e_lam(z) = e_{lam + mu}(z).
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateMatrix, DimensionMismatch
from .riemann import LatticePoint

_INV_TOL = 1e-12
_COMMUTE_TOL = 1e-12


class MultiplierSystem:
    """Degree-s rank-r multiplier data (A_1, ..., A_g).

    Parameters
    ----------
    g : int
        Number of complex variables.
    r : int
        Rank (size of the square matrices).
    s : int
        Degree, a positive integer.
    matrices : sequence of g arrays, each r x r
        Must be invertible (inverse residual < 1e-12) and pairwise commuting
        (commutator norm < 1e-12).
    """

    def __init__(self, g, r, s, matrices, check_commuting=True):
        if s < 1:
            raise DimensionMismatch(f"degree must be a positive integer, got {s}")
        if len(matrices) != g:
            raise DimensionMismatch(f"expected {g} matrices, got {len(matrices)}")
        self.g, self.r, self.s = int(g), int(r), int(s)
        self.A = []
        self.A_inv = []
        eye = np.eye(r)
        for j, mat in enumerate(matrices):
            a = np.array(mat, dtype=complex)
            if a.shape != (r, r):
                raise DimensionMismatch(f"matrix {j} has shape {a.shape}, expected ({r},{r})")
            try:
                ainv = np.linalg.inv(a)
            except np.linalg.LinAlgError as exc:
                raise DegenerateMatrix(f"matrix {j} is singular") from exc
            if np.max(np.abs(a @ ainv - eye)) > _INV_TOL * max(1.0, np.max(np.abs(a)) ** 2):
                raise DegenerateMatrix(f"matrix {j} is numerically singular")
            a.setflags(write=False)
            self.A.append(a)
            self.A_inv.append(ainv)
        if not check_commuting:
            # escape hatch for demonstrating that the cocycle identity fails
            # on a non-commuting family; everything downstream assumes it
            return
        for j in range(g):
            for k in range(j + 1, g):
                comm = self.A[j] @ self.A[k] - self.A[k] @ self.A[j]
                if np.max(np.abs(comm)) > _COMMUTE_TOL:
                    raise DegenerateMatrix(
                        f"matrices {j} and {k} do not commute (residual {np.max(np.abs(comm)):.3e})"
                    )

    def matrix_power(self, j, k):
        """A_j^k for any integer k (binary exponentiation, inverse for k<0)."""
        if k >= 0:
            return np.linalg.matrix_power(self.A[j], k)
        return np.linalg.matrix_power(self.A_inv[j], -k)

    def word(self, m):
        """The product A_1^{m_1} ... A_g^{m_g} for an integer vector m."""
        out = np.eye(self.r, dtype=complex)
        for j, mj in enumerate(m):
            if mj:
                out = out @ self.matrix_power(j, int(mj))
        return out

    def norm_constants(self):
        """C_j = max(||A_j||, ||A_j^-1||) in operator 2-norm, for the majorant."""
        return np.array(
            [
                max(np.linalg.norm(a, 2), np.linalg.norm(ai, 2))
                for a, ai in zip(self.A, self.A_inv)
            ]
        )

    def __repr__(self):
        return f"MultiplierSystem(g={self.g}, r={self.r}, s={self.s})"


def trivial_system(g, s=1):
    """Rank-1 system with all A_j = (1): the scalar theta multiplier."""
    return MultiplierSystem(g, 1, s, [np.eye(1)] * g)


def multiplier(sys, omega, lam, z):
    """The factor of automorphy e_lam(z) as an r x r matrix.

    Parameters
    ----------
    sys : MultiplierSystem
    omega : RiemannMatrix
    lam : LatticePoint
    z : array_like, shape (g,)
    """
    if lam.g != sys.g or omega.g != sys.g:
        raise DimensionMismatch("lattice point / period matrix dimension mismatch")
    m = np.asarray(lam.m, dtype=float)
    z = np.asarray(z, dtype=complex)
    quad = m @ omega.matrix @ m
    phase = np.exp(-sys.s * np.pi * 1j * quad - 2 * sys.s * np.pi * 1j * (m @ z))
    return phase * sys.word(lam.m)


def cocycle_residual(sys, omega, lam1, lam2, z):
    """Deviation from the cocycle identity at z, both multiplication orders.

    The factors grow like exp of the quadratic form in m, so the residual is
    reported relative to the largest entry magnitude among the three factors.
    """
    z = np.asarray(z, dtype=complex)
    v1 = lam1.vector(omega)
    v2 = lam2.vector(omega)
    both = multiplier(sys, omega, lam1 + lam2, z)
    left = multiplier(sys, omega, lam1, z + v2) @ multiplier(sys, omega, lam2, z)
    right = multiplier(sys, omega, lam2, z + v1) @ multiplier(sys, omega, lam1, z)
    scale = max(np.max(np.abs(both)), np.max(np.abs(left)), np.max(np.abs(right)), 1e-300)
    err = max(np.max(np.abs(left - both)), np.max(np.abs(right - both)))
    return float(err / scale)


def jordan_block(r, eigenvalue=1.0):
    """Single r x r Jordan block."""
    return np.eye(r, dtype=complex) * eigenvalue + np.eye(r, r, 1, dtype=complex)


def jordan_example(r, g, polys, s=1):
    """Nondiagonalizable example family: A_1 = J_r(1), A_j = p_j(A_1).

    Parameters
    ----------
    r, g : int
        Rank and dimension of the system.
    polys : sequence of g-1 coefficient sequences
        p_j(t) = sum_k c_k t^k with coefficients low to high; polynomials in
        a single matrix automatically commute with it.
    s : int, optional
        Degree of the system.

    Raises
    ------
    DegenerateMatrix
        If some p_j(A_1) is singular, e.g. p_j(t) = t - 1 on the unipotent
        block (p_j(1) = 0 kills the only eigenvalue).
    """
    if len(polys) != g - 1:
        raise DimensionMismatch(f"expected {g - 1} polynomials, got {len(polys)}")
    j1 = jordan_block(r, 1.0)
    mats = [j1]
    for coeffs in polys:
        acc = np.zeros((r, r), dtype=complex)
        for c in reversed(list(coeffs)):
            acc = acc @ j1 + c * np.eye(r)
        mats.append(acc)
    return MultiplierSystem(g, r, s, mats)
