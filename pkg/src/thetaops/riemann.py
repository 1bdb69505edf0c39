"""Period matrices and lattice bookkeeping.

The ambient torus is C^g / (Z^g + Omega Z^g) with Omega symmetric and
Im(Omega) positive definite.  Lattice points are stored by their integer
coordinate pair (n, m), meaning n + Omega m.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, ImaginaryPartNotPositiveDefinite, NotSymmetric

_SYM_TOL = 1e-12
_PIVOT_TOL = 1e-12


class RiemannMatrix:
    """Validated g x g period matrix.

    Parameters
    ----------
    matrix : array_like, shape (g, g), complex
        Must be symmetric (tolerance 1e-12 relative) with positive definite
        imaginary part (smallest eigenvalue > 1e-12 relative to the largest).

    Attributes
    ----------
    g : int
    matrix : ndarray, the validated copy (read-only)
    imag_min_eig : float, smallest eigenvalue of Im(Omega); this is the
        decay constant used by the series truncation bounds.
    """

    def __init__(self, matrix):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"period matrix must be square, got {m.shape}")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.T)) > _SYM_TOL * scale:
            raise NotSymmetric(f"asymmetry {np.max(np.abs(m - m.T)):.3e} exceeds tolerance")
        m = 0.5 * (m + m.T)
        im = m.imag
        eigs = np.linalg.eigvalsh(im)
        if eigs[0] <= _PIVOT_TOL * max(1.0, eigs[-1]):
            raise ImaginaryPartNotPositiveDefinite(
                f"smallest eigenvalue of Im(Omega) is {eigs[0]:.3e}"
            )
        m.setflags(write=False)
        self.matrix = m
        self.g = m.shape[0]
        self.imag_min_eig = float(eigs[0])

    def lattice_vector(self, n, m):
        """The complex vector n + Omega m for integer vectors n, m."""
        n = np.asarray(n, dtype=float)
        m = np.asarray(m, dtype=float)
        if n.shape != (self.g,) or m.shape != (self.g,):
            raise DimensionMismatch(f"lattice coordinates must have length {self.g}")
        return n + self.matrix @ m

    def cell_point(self, u, v):
        """The point u + Omega v for real coordinate vectors u, v in [0,1)^g."""
        return np.asarray(u, dtype=float) + self.matrix @ np.asarray(v, dtype=float)

    def to_cell_coords(self, z):
        """Real coordinates (u, v) with z = u + Omega v, batched over leading axes."""
        z = np.asarray(z, dtype=complex)
        im_inv = np.linalg.inv(self.matrix.imag)
        v = z.imag @ im_inv.T
        u = z.real - v @ self.matrix.real.T
        return u, v

    def reduce_to_cell(self, z):
        """Translate z by a lattice vector into the fundamental cell.

        Returns ``(z_reduced, n, m)`` with ``z = z_reduced + n + Omega m`` and
        integer arrays n, m (batched like z).
        """
        u, v = self.to_cell_coords(z)
        nn = np.floor(u).astype(np.int64)
        mm = np.floor(v).astype(np.int64)
        zr = (u - nn) + (v - mm) @ self.matrix.T
        return zr, nn, mm

    def random_cell_points(self, rng, count):
        """Uniform points in the fundamental cell (shape (count, g))."""
        u = rng.random((count, self.g))
        v = rng.random((count, self.g))
        return u + v @ self.matrix.T

    def imag_radius(self, z):
        """max-norm bound on Im(z) over a batch; feeds the series majorant."""
        z = np.asarray(z, dtype=complex)
        return float(np.max(np.abs(z.imag))) if z.size else 0.0

    def __repr__(self):
        return f"RiemannMatrix(g={self.g})"


def validate_riemann_matrix(matrix):
    """Validate and wrap a period matrix (see :class:`RiemannMatrix`).

    An already-validated :class:`RiemannMatrix` passes through unchanged.
    """
    if isinstance(matrix, RiemannMatrix):
        return matrix
    return RiemannMatrix(matrix)


class LatticePoint:
    """Integer lattice element n + Omega m, stored by coordinates."""

    __slots__ = ("n", "m")

    def __init__(self, n, m):
        self.n = tuple(int(x) for x in n)
        self.m = tuple(int(x) for x in m)
        if len(self.n) != len(self.m):
            raise DimensionMismatch("n and m must have the same length")

    @property
    def g(self):
        return len(self.n)

    def __add__(self, other):
        if self.g != other.g:
            raise DimensionMismatch("lattice points of different dimension")
        return LatticePoint(
            [a + b for a, b in zip(self.n, other.n)],
            [a + b for a, b in zip(self.m, other.m)],
        )

    def __eq__(self, other):
        return isinstance(other, LatticePoint) and self.n == other.n and self.m == other.m

    def __hash__(self):
        return hash((self.n, self.m))

    def vector(self, omega):
        """The complex vector in C^g for the given period matrix."""
        return omega.lattice_vector(self.n, self.m)

    def __repr__(self):
        return f"LatticePoint(n={self.n}, m={self.m})"
