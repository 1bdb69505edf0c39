"""Vector-valued theta functions of degree s with matrix multipliers.

A theta function here is an entire C^r-valued function with the
quasi-periodicity

    theta(z + Omega m + n) = exp(-s pi i <m, Omega m> - 2 s pi i <m, z>)
                             * A_1^{m_1} ... A_g^{m_g} theta(z).

Its Fourier coefficients a_l (l in Z^g) are determined by the r s^g seed
vectors a_{l0}, l0 in [0,s)^g, through

    a_{l0 + s l} = exp(s pi i <l, Omega l> + 2 pi i <l0, Omega l>)
                   * A_1^{-l_1} ... A_g^{-l_g} a_{l0},

so the space of such functions has dimension r s^g.  Evaluation sums the
Fourier series over a box |l|_inf <= R, with R chosen from a certified
per-coordinate product majorant of the dropped tail.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NearDivisor,
    TolTooSmall,
)
from .jets import Jet, JetSpace, jet_log
from .multipliers import MultiplierSystem, trivial_system

MAX_RADIUS = 60
MAX_DERIV_ORDER = 6
_TWO_PI_I = 2j * np.pi


def _exp_cap(x):
    """exp with overflow clamped to a huge finite sentinel.

    Oversized majorant terms only need to exceed any tolerance; returning
    1e300 keeps the tail sums finite and the radius search well defined.
    """
    return math.exp(x) if x < 690.0 else 1e300


def seed_tuples(s, g):
    """Residue classes l0 in [0, s)^g, lexicographic."""
    return list(itertools.product(range(s), repeat=g))


@dataclass
class ThetaValue:
    """Series value with the cutoff radius and certified tail bound used."""

    value: np.ndarray
    radius: int
    error_bound: float


class _EvalPlan:
    """Shared z-independent series data for one (system, omega, radius).

    Enumerates all Fourier exponents q = l0 + s*l with |l|_inf <= R and
    precomputes exp of the quadratic phase together with the matrix words
    A^{-l}, so that evaluating at P points for D derivative requests is a
    single (P x nq) @ (nq x D*r*B) complex matrix product.
    """

    def __init__(self, sys, omega, radius):
        g, s = sys.g, sys.s
        self.sys, self.omega, self.radius = sys, omega, radius
        grids = np.meshgrid(
            *[np.arange(-s * radius, s * radius + s) for _ in range(g)], indexing="ij"
        )
        q = np.stack([a.ravel() for a in grids], axis=1)  # (nq, g)
        l0 = np.mod(q, s)
        lhat = (q - l0) // s
        om = omega.matrix
        quad = np.einsum("qi,ij,qj->q", lhat, om, lhat)
        cross = np.einsum("qi,ij,qj->q", l0, om, lhat)
        # single combined exponent: the cross term alone could overflow
        self.coeff_phase = np.exp(s * np.pi * 1j * quad + _TWO_PI_I * cross)
        self.q = q
        seed_index = {t: i for i, t in enumerate(seed_tuples(s, g))}
        self.seed_pos = np.array([seed_index[tuple(row)] for row in l0], dtype=np.intp)
        # matrix words A^{-l} via per-coordinate power tables
        tables = []
        for j in range(g):
            tab = np.stack(
                [sys.matrix_power(j, -int(n)) for n in range(-radius, radius + 1)]
            )
            tables.append(tab)
        word = tables[0][lhat[:, 0] + radius]
        for j in range(1, g):
            word = np.einsum("qab,qbc->qac", word, tables[j][lhat[:, j] + radius])
        self.words = word  # (nq, r, r)
        self._weight_cache = {}

    def coefficients(self, seed_stack):
        """Fourier coefficient stack (nq, r, B) for seeds of shape (s^g, r, B)."""
        picked = seed_stack[self.seed_pos]  # (nq, r, B)
        return self.coeff_phase[:, None, None] * np.einsum(
            "qab,qbB->qaB", self.words, picked
        )

    def values(self, zs, derivs, seed_stack, cache_key=None):
        """Derivative values (P, D, r, B) of the series at the points zs."""
        zs = np.asarray(zs, dtype=complex).reshape(-1, self.sys.g)
        key = (cache_key, tuple(derivs)) if cache_key is not None else None
        cached = self._weight_cache.get(key) if key is not None else None
        if cached is None:
            coeffs = self.coefficients(seed_stack)  # (nq, r, B)
            nq, r, b = coeffs.shape
            moms = np.empty((len(derivs), nq), dtype=complex)
            base = _TWO_PI_I * self.q  # (nq, g)
            for d, mi in enumerate(derivs):
                acc = np.ones(nq, dtype=complex)
                for j, dj in enumerate(mi):
                    if dj:
                        acc = acc * base[:, j] ** dj
                moms[d] = acc
            weighted = (moms[:, :, None, None] * coeffs[None]).reshape(
                len(derivs), nq, r * b
            )
            weighted = np.moveaxis(weighted, 0, 1).reshape(nq, len(derivs) * r * b)
            if key is not None:
                self._weight_cache[key] = (weighted, (r, b))
        else:
            weighted, (r, b) = cached
        # split the phase into magnitude and unit part and renormalize by the
        # per-point peak so that exp never overflows before the coefficient
        # decay damps it; chunk over points to cap the (P x nq) transient
        nq = self.q.shape[0]
        chunk = max(1, (1 << 22) // max(nq, 1))
        pieces = []
        for i0 in range(0, len(zs), chunk):
            zc = zs[i0 : i0 + chunk]
            mag = zc.imag @ (-2 * np.pi * self.q.T.astype(float))  # (Pc, nq)
            # the peak term may be astronomically larger than the damped sum,
            # so clamp the renormalization to keep both factors representable;
            # points so far out that even the clamped exponent overflows give
            # inf values, surfacing loudly downstream instead of silent junk
            shift = np.minimum(mag.max(axis=1, keepdims=True), 600.0)
            with np.errstate(over="ignore", invalid="ignore"):
                phases = np.exp(
                    np.minimum(mag - shift, 700.0)
                    + 1j * (2 * np.pi * (zc.real @ self.q.T))
                )
                flat = phases @ weighted  # (Pc, D*r*B)
                flat *= np.exp(shift)
            pieces.append(flat)
        if pieces:
            flat = np.vstack(pieces)
        else:
            flat = np.zeros((0, weighted.shape[1]), dtype=complex)
        return flat.reshape(len(zs), len(derivs), r, b)


class VectorTheta:
    """A single theta function: multiplier system, period matrix, seed data.

    Parameters
    ----------
    sys : MultiplierSystem
    omega : RiemannMatrix
    seeds : array (s^g, r) or mapping {l0 tuple: length-r vector}
        Fourier seeds a_{l0} on the residue classes l0 in [0,s)^g
        (lexicographic order for the array form).
    """

    def __init__(self, sys, omega, seeds):
        if sys.g != omega.g:
            raise DimensionMismatch("multiplier system / period matrix dimension mismatch")
        self.sys = sys
        self.omega = omega
        tuples = seed_tuples(sys.s, sys.g)
        if isinstance(seeds, dict):
            arr = np.zeros((len(tuples), sys.r), dtype=complex)
            for l0, vec in seeds.items():
                arr[tuples.index(tuple(int(x) for x in l0))] = np.asarray(vec)
            seeds = arr
        seeds = np.asarray(seeds, dtype=complex)
        if seeds.shape != (len(tuples), sys.r):
            raise DimensionMismatch(
                f"seed array must have shape ({len(tuples)}, {sys.r}), got {seeds.shape}"
            )
        self.seeds = seeds
        self._scale = None

    # -- structure ----------------------------------------------------------

    @property
    def g(self):
        return self.sys.g

    @property
    def r(self):
        return self.sys.r

    @property
    def s(self):
        return self.sys.s

    def coefficient(self, l):
        """Fourier coefficient a_l in C^r via the resolved recurrence."""
        l = np.asarray(l, dtype=np.int64)
        if l.shape != (self.g,):
            raise DimensionMismatch(f"index must have length {self.g}")
        s = self.s
        l0 = np.mod(l, s)
        lhat = (l - l0) // s
        om = self.omega.matrix
        phase = np.exp(
            s * np.pi * 1j * (lhat @ om @ lhat) + _TWO_PI_I * (l0 @ om @ lhat)
        )
        word = np.eye(self.r, dtype=complex)
        for j, lj in enumerate(lhat):
            if lj:
                word = word @ self.sys.matrix_power(j, -int(lj))
        base = self.seeds[seed_tuples(s, self.g).index(tuple(l0))]
        return phase * (word @ base)

    # -- truncation majorant -------------------------------------------------

    def _shell_weights(self, domain_radius, deriv_max, cell_data=None):
        """Certified 1-D shell majorant for the series tail.

        Writing q = l0 + s*lhat and u = lhat + l0/s, completing the square in
        the imaginary quadratic form Lambda = Im(Omega) gives

            |a_q exp(2 pi i <q, z>)| <= C * exp(s pi <v, Lambda v>)
                                          * exp(-s pi |u + v|_Lambda^2)

        with Im(z) = Lambda v and C = exp(pi <l0, Lambda l0> / s).  The tail
        outside the box |lhat|_inf <= R is then bounded shell by shell using
        |u + v|_Lambda >= sqrt(lam_min) * max(0, n - c0) on |lhat|_inf = n.
        """
        s, g = self.s, self.g
        lam = self.omega.matrix.imag
        lam_min = self.omega.imag_min_eig
        l0max = s - 1
        if cell_data is None:
            # fall back to bounds derived from |Im z|_inf <= domain_radius
            vinf = domain_radius * float(
                np.max(np.sum(np.abs(np.linalg.inv(lam)), axis=1))
            )
            vquad = g * vinf * domain_radius
        else:
            vinf, vquad = cell_data
        seed_norms = np.linalg.norm(self.seeds, axis=1)
        class_pref = 0.0
        for l0, nrm in zip(seed_tuples(s, g), seed_norms):
            arr = np.asarray(l0, dtype=float)
            class_pref += float(nrm) * _exp_cap(np.pi * (arr @ lam @ arr) / s)
        pref = class_pref * _exp_cap(s * np.pi * vquad)
        cw = max(float(np.max(self.sys.norm_constants())), 1.0)
        c0 = math.sqrt(g) * (l0max / s + vinf)
        a = s * np.pi * lam_min
        dtot = list(deriv_max) + [0] * (g - len(deriv_max))
        terms = []
        # the cutoff must stay absolute: a relative cutoff could drop shells
        # that are tiny next to the peak yet far above the tolerance
        for n in range(0, 8 * MAX_RADIUS + 1):
            count = 1.0 if n == 0 else 2.0 * g * (2 * n + 1) ** (g - 1)
            dfac = 1.0
            for dj in dtot:
                dfac *= (2 * np.pi * (l0max + s * n)) ** dj
            t = (
                count
                * dfac
                * cw ** (g * n)
                * _exp_cap(-a * max(0.0, n - c0) ** 2)
            )
            terms.append(t)
            if n > c0 and t < 1e-320:
                break
        else:
            terms.append(math.inf)  # could not certify convergence in range
        return pref, np.array(terms)

    def truncation_radius(self, domain_radius, tol, deriv_max=None, cell_data=None):
        """Smallest box radius R with the certified tail bound below tol.

        Parameters
        ----------
        domain_radius : float
            Bound on |Im z|_inf over the intended evaluation points.
        tol : float
            Absolute tail tolerance.
        deriv_max : sequence of int, optional
            Per-variable maximum derivative order the bound must also cover.
        cell_data : (float, float), optional
            Exact (max |v|_inf, max <v, Lambda v>) over the points, where
            Im z = Lambda v.  Tightens the bound; derived from domain_radius
            when omitted.

        Raises
        ------
        TolTooSmall
            If no radius up to the hard cap (60) achieves the tolerance.
        """
        if deriv_max is None:
            deriv_max = [0] * self.g
        pref, weights = self._shell_weights(
            float(domain_radius), list(deriv_max), cell_data
        )
        # suffix sums: tail(R) = pref * sum of shells beyond R
        suffix = np.concatenate([np.cumsum(weights[::-1])[::-1], [0.0]])
        for radius in range(1, MAX_RADIUS + 1):
            tail = pref * float(suffix[radius + 1]) if radius + 1 < len(suffix) else 0.0
            if tail < tol:
                return radius, float(max(tail, 0.0))
        raise TolTooSmall(
            f"tail bound still {pref * float(suffix[MAX_RADIUS + 1]):.3e} "
            f"at the radius cap {MAX_RADIUS}"
        )

    # -- evaluation ----------------------------------------------------------

    def _plan(self, radius):
        cache = getattr(self.sys, "_plan_cache", None)
        if cache is None:
            cache = self.sys._plan_cache = {}
        key = (id(self.omega), self.s, radius)
        plan = cache.get(key)
        if plan is None:
            plan = cache[key] = _EvalPlan(self.sys, self.omega, radius)
        return plan

    def evaluate_many(self, zs, derivs=None, tol=1e-12):
        """Batched derivative evaluation.

        Parameters
        ----------
        zs : array (P, g) complex points.
        derivs : sequence of multi-index tuples (default: just the value).
        tol : absolute truncation tolerance for the series tail.

        Returns
        -------
        values : ndarray (P, D, r)
        radius : int
        error_bound : float
        """
        zs = np.asarray(zs, dtype=complex).reshape(-1, self.g)
        if derivs is None:
            derivs = [(0,) * self.g]
        derivs = [tuple(int(x) for x in d) for d in derivs]
        for d in derivs:
            if len(d) != self.g:
                raise DimensionMismatch(f"derivative index {d} must have length {self.g}")
            if sum(d) > MAX_DERIV_ORDER:
                raise IndexOutOfRange(
                    f"derivative order {sum(d)} exceeds the cap {MAX_DERIV_ORDER}"
                )
        dmax = [max(d[j] for d in derivs) for j in range(self.g)]
        rho = self.omega.imag_radius(zs)
        if zs.size:
            lam = self.omega.matrix.imag
            v = zs.imag @ np.linalg.inv(lam).T
            cell_data = (
                float(np.max(np.abs(v))),
                float(np.max(np.einsum("pi,ij,pj->p", v, lam, v))),
            )
        else:
            cell_data = (0.0, 0.0)
        radius, bound = self.truncation_radius(rho, tol, dmax, cell_data=cell_data)
        plan = self._plan(radius)
        vals = plan.values(zs, derivs, self.seeds[:, :, None], cache_key=id(self))
        return vals[..., 0], radius, bound

    def evaluate(self, z, deriv=None, tol=1e-12):
        """Value (or one derivative) at a single point, with tail certificate."""
        derivs = [tuple(deriv)] if deriv is not None else None
        vals, radius, bound = self.evaluate_many(
            np.asarray(z, dtype=complex).reshape(1, -1), derivs, tol
        )
        return ThetaValue(vals[0, 0], radius, bound)

    # -- derived quantities ---------------------------------------------------

    def scale(self, rng=None):
        """Typical magnitude: max |theta| over a probe grid in the cell."""
        if self._scale is None:
            rng = rng or np.random.default_rng(0)
            pts = self.omega.random_cell_points(rng, 128)
            vals, _, _ = self.evaluate_many(pts, tol=1e-8)
            self._scale = float(np.max(np.abs(vals)))
        return self._scale

    def guard(self, zs, threshold=1e-8, tol=1e-10):
        """Values at zs, raising NearDivisor where |theta| < threshold * scale."""
        vals, _, _ = self.evaluate_many(zs, tol=tol)
        flat = np.abs(vals[:, 0, :]).max(axis=1) if self.r > 1 else np.abs(vals[:, 0, 0])
        bad = np.nonzero(flat < threshold * self.scale())[0]
        if bad.size:
            raise NearDivisor(f"{bad.size} points within {threshold} of the divisor")
        return vals[:, 0, :]

    def jet_at(self, zs, order, tol=1e-12):
        """Taylor jets of theta itself in the g z-variables, batched over points.

        Returns a Jet with coefficient array of shape (P, r, n); component
        axis comes before the coefficient axis.
        """
        space = JetSpace(self.g, order)
        vals, _, _ = self.evaluate_many(zs, space.exps, tol)  # (P, D, r)
        coeffs = np.moveaxis(vals, 1, 2) / space.factorials  # (P, r, D)
        return Jet(space, coeffs)


def scalar_theta(omega, s=1):
    """The rank-1 theta of degree s with trivial multipliers and unit seed.

    For s > 1 the seed on the zero residue class is used; this is the fixed
    divisor theta the quotient constructions divide by.
    """
    sys = trivial_system(omega.g, s)
    seeds = np.zeros((s**omega.g, 1), dtype=complex)
    seeds[0, 0] = 1.0
    return VectorTheta(sys, omega, seeds)


def basis(sys, omega):
    """Unit-seed basis of the degree-s rank-r theta space (dimension r s^g)."""
    tuples = seed_tuples(sys.s, sys.g)
    out = []
    for i in range(len(tuples)):
        for rho in range(sys.r):
            seeds = np.zeros((len(tuples), sys.r), dtype=complex)
            seeds[i, rho] = 1.0
            out.append(VectorTheta(sys, omega, seeds))
    return out


def basis_values(sys, omega, zs, derivs=None, tol=1e-12):
    """Values of the whole unit-seed basis at once: array (P, D, r, r*s^g).

    Basis order matches :func:`basis`: seed class index major, component
    index minor.
    """
    model = VectorTheta(sys, omega, np.zeros((sys.s**sys.g, sys.r), dtype=complex))
    if derivs is None:
        derivs = [(0,) * sys.g]
    dmax = [max(d[j] for d in derivs) for j in range(sys.g)]
    zs = np.asarray(zs, dtype=complex).reshape(-1, sys.g)
    rho = omega.imag_radius(zs)
    big = VectorTheta(sys, omega, np.ones((sys.s**sys.g, sys.r), dtype=complex))
    radius, _ = big.truncation_radius(rho, tol, dmax)
    plan = model._plan(radius)
    nseeds = sys.s**sys.g
    stack = np.zeros((nseeds, sys.r, nseeds * sys.r), dtype=complex)
    for i in range(nseeds):
        for rho_i in range(sys.r):
            stack[i, rho_i, i * sys.r + rho_i] = 1.0
    return plan.values(zs, [tuple(d) for d in derivs], stack, cache_key=("basis", id(omega)))


def gram_rank(sys, omega, rng, extra_points=5, tol=1e-12, threshold=1e-8):
    """Evaluate the basis on random cell points and return (rank, singulars).

    The evaluation matrix has one row per basis element and one column per
    (point, component) pair; its numerical rank equals r s^g exactly when the
    basis is linearly independent at the probe set.
    """
    dim = sys.r * sys.s**sys.g
    pts = omega.random_cell_points(rng, dim + extra_points)
    vals = basis_values(sys, omega, pts, tol=tol)  # (P, 1, r, B)
    mat = vals[:, 0, :, :].reshape(-1, dim).T
    sv = np.linalg.svd(mat, compute_uv=False)
    rank = int(np.sum(sv > threshold * sv[0]))
    return rank, sv


def quasi_periodicity_residual(theta, z, lam, tol=1e-12):
    """Relative defect of theta(z + lam) = e_lam(z) theta(z) at one point.

    Normalized by the larger of the two sides' magnitudes (the multiplier can
    be exponentially large in the lattice coordinates).
    """
    from .multipliers import multiplier  # local import to avoid a cycle

    z = np.asarray(z, dtype=complex).reshape(theta.g)
    lv = lam.vector(theta.omega)
    lhs, _, _ = theta.evaluate_many((z + lv)[None, :], tol=tol)
    rhs = multiplier(theta.sys, theta.omega, lam, z) @ theta.evaluate_many(
        z[None, :], tol=tol
    )[0][0, 0]
    scale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)), theta.scale())
    return float(np.max(np.abs(lhs[0, 0] - rhs)) / scale)


def log_theta_jet(theta, zs, order, tol=1e-12, guard=1e-8):
    """Jets of log(theta) at the points zs for a scalar (r=1) theta.

    Raises NearDivisor if any point is within ``guard`` (relative) of the
    zero set.
    """
    if theta.r != 1:
        raise DimensionMismatch("log jets need a scalar theta")
    theta.guard(zs, threshold=guard, tol=tol)
    jet = theta.jet_at(zs, order, tol)
    scalar = Jet(jet.space, jet.coeffs[:, 0, :])
    return jet_log(scalar)


def log_theta_derivative(theta, z, m, tol=1e-12):
    """d^m log theta at one point z (scalar theta, |m| >= 1)."""
    m = tuple(int(x) for x in m)
    order = sum(m)
    if order < 1:
        raise IndexOutOfRange("log derivative needs |m| >= 1")
    jet = log_theta_jet(theta, np.asarray(z, dtype=complex).reshape(1, -1), order, tol)
    return jet.derivative(m)[0]


class PoleFunction:
    """A meromorphic function given by an evaluator plus its pole order."""

    def __init__(self, fn, pole_order):
        self._fn = fn
        self.pole_order = int(pole_order)

    def __call__(self, zs):
        return self._fn(np.asarray(zs, dtype=complex))

    def __mul__(self, other):
        if isinstance(other, (PoleFunction, MeromorphicFunction)):
            return PoleFunction(
                lambda zs: self(zs) * other(zs), self.pole_order + other.pole_order
            )
        return PoleFunction(lambda zs: self(zs) * other, self.pole_order)

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, (PoleFunction, MeromorphicFunction)):
            return PoleFunction(
                lambda zs: self(zs) + other(zs), max(self.pole_order, other.pole_order)
            )
        return PoleFunction(lambda zs: self(zs) + other, self.pole_order)

    __radd__ = __add__


class MeromorphicFunction:
    """Lattice-periodic quotient Theta_n(z) / theta(z)^n with pole order <= n.

    The numerator is a degree-(n s) scalar theta combination; dividing by the
    fixed degree-s divisor theta to the n-th power cancels the multiplier, so
    the quotient is a genuine meromorphic function on the torus.
    """

    def __init__(self, omega, n, coeffs, s=1, guard=1e-8):
        g = omega.g
        dim = (n * s) ** g
        coeffs = np.asarray(coeffs, dtype=complex).reshape(-1)
        if coeffs.shape != (dim,):
            raise DimensionMismatch(f"need {dim} coefficients, got {coeffs.shape[0]}")
        self.omega, self.n, self.s = omega, int(n), int(s)
        self.numerator = VectorTheta(
            trivial_system(g, n * s), omega, coeffs[:, None].copy()
        )
        self.denominator = scalar_theta(omega, s)
        self._guard = guard

    @property
    def pole_order(self):
        return self.n

    def __call__(self, zs, tol=1e-12):
        zs = np.asarray(zs, dtype=complex).reshape(-1, self.omega.g)
        den = self.denominator.guard(zs, threshold=self._guard, tol=tol)[:, 0]
        num, _, _ = self.numerator.evaluate_many(zs, tol=tol)
        return num[:, 0, 0] / den**self.n

    def __mul__(self, other):
        if isinstance(other, (PoleFunction, MeromorphicFunction)):
            return PoleFunction(
                lambda zs: self(zs) * other(zs), self.pole_order + other.pole_order
            )
        return PoleFunction(lambda zs: self(zs) * other, self.pole_order)

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, (PoleFunction, MeromorphicFunction)):
            return PoleFunction(
                lambda zs: self(zs) + other(zs), max(self.pole_order, other.pole_order)
            )
        return PoleFunction(lambda zs: self(zs) + other, self.pole_order)

    __radd__ = __add__


def meromorphic_function(omega, n, coeffs, s=1):
    """Build the quotient Theta_n / theta^n (see :class:`MeromorphicFunction`)."""
    return MeromorphicFunction(omega, n, coeffs, s=s)


def divisor_point(theta, rng, max_tries=40, newton_steps=60):
    """A point on the zero set of a scalar theta, found by 1-D Newton.

    Freezes all but the first coordinate at a random cell point and solves
    theta(z) = 0 for the first coordinate.
    """
    g = theta.g
    e0 = (0,) * g
    e1 = tuple(1 if j == 0 else 0 for j in range(g))
    for _ in range(max_tries):
        z = theta.omega.random_cell_points(rng, 1)[0]
        for _ in range(newton_steps):
            vals, _, _ = theta.evaluate_many(z[None, :], [e0, e1], tol=1e-13)
            f, df = vals[0, 0, 0], vals[0, 1, 0]
            if abs(df) < 1e-12:
                break
            step = f / df
            z = z.copy()
            z[0] -= step
            if abs(step) < 1e-14:
                break
        vals, _, _ = theta.evaluate_many(z[None, :], [e0], tol=1e-13)
        if abs(vals[0, 0, 0]) < 1e-11 * theta.scale():
            return z
    raise NearDivisor("could not locate a divisor point")
