"""Baker-Akhiezer modules over an abelian variety.

An element of the module M_c(n) is

    g(x) * theta_num(z + (x+c)/(sn)) / theta_div(z)^n
         * exp(-sum_j (x_j/s) d_{z_j} log theta_div(z)),

where theta_num is a vector theta of degree s*n sharing the multiplier
matrices A_j, and theta_div is the fixed degree-s scalar divisor theta.  The
quotient f(z,x) (without the exponential gauge) satisfies

    f(z + Omega m + k, x) = exp(-2 pi i <m, c+x>) A_1^{m_1}...A_g^{m_g} f(z,x),

so its pole divisor is n copies of Y = {theta_div = 0} and the whole space at
level n has dimension F(0, n) = r (sn)^g.  Everything here is evaluated as
truncated Taylor jets in x at x = 0, batched over z-points.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    GeneralPositionFailure,
    IndexOutOfRange,
    InsufficientPoints,
    NewtonDivergence,
    NoIntegerSolution,
)
from .jets import Jet, JetSpace, exp_linear_jet, jet_derive, jet_mul, shift_table
from .multipliers import MultiplierSystem
from .theta import VectorTheta, basis_values, log_theta_jet, scalar_theta


def _factorial_mi(alpha):
    f = 1
    for a in alpha:
        f *= math.factorial(a)
    return f


# -- level combinatorics ------------------------------------------------------


def S(g, n):
    """Number of constant-coefficient operators of degree <= n-1 in g variables.

    Equals C(n+g-1, g); returns 0 for n <= 0 so that out-of-range terms of the
    level-count identity vanish.
    """
    if g < 1:
        raise IndexOutOfRange(f"need g >= 1, got {g}")
    if n <= 0:
        return 0
    return math.comb(n + g - 1, g)


def F(j, n, r, s, g):
    """Dimension of the level filtration after j restrictions.

    F(0, n) = r (sn)^g and F(j+1, n) = F(j, n) - F(j, n-1), with F(j, n) = 0
    for n <= 0.  Computed as the j-th finite difference, exactly in integers.
    """
    if not 0 <= j <= g - 1:
        raise IndexOutOfRange(f"need 0 <= j <= g-1, got j={j}, g={g}")
    total = 0
    for i in range(j + 1):
        m = n - i
        f0 = r * (s * m) ** g if m >= 1 else 0
        total += (-1) ** i * math.comb(j, i) * f0
    return total


@dataclass(frozen=True)
class LevelSignature:
    """Counts a_i of basis elements first entering at pole level i."""

    a: tuple

    @property
    def g(self):
        return len(self.a)

    @property
    def total(self):
        return int(sum(self.a))

    def levels(self):
        """Per-element pole levels, ascending: level i repeated a_i times."""
        out = []
        for i, ai in enumerate(self.a, start=1):
            out.extend([i] * ai)
        return out


def signature(g, r, s):
    """Solve the level-count identity for the signature (a_1, ..., a_g).

    The defining system is sum_i a_i S(g, n-i+1) = F(0, n) for n = g+1..2g,
    solved exactly over the rationals.  The solution must be a nonnegative
    integer vector satisfying the same identity for every 0 <= j < g-1 and
    n up to 2g+5 (with S(g-j, .) against F(j, .)), else NoIntegerSolution.
    """
    from fractions import Fraction

    if g < 1 or r < 1 or s < 1:
        raise IndexOutOfRange(f"need g, r, s >= 1, got g={g}, r={r}, s={s}")
    rows = []
    rhs = []
    for n in range(g + 1, 2 * g + 1):
        rows.append([Fraction(S(g, n - i + 1)) for i in range(1, g + 1)])
        rhs.append(Fraction(F(0, n, r, s, g)))
    # Gaussian elimination with exact arithmetic
    m = [row + [b] for row, b in zip(rows, rhs)]
    for col in range(g):
        piv = next((i for i in range(col, g) if m[i][col] != 0), None)
        if piv is None:
            raise NoIntegerSolution(f"singular level system for g={g}, r={r}, s={s}")
        m[col], m[piv] = m[piv], m[col]
        inv = Fraction(1, 1) / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for i in range(g):
            if i != col and m[i][col] != 0:
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[col])]
    a = [row[g] for row in m]
    if any(x.denominator != 1 or x < 0 for x in a):
        raise NoIntegerSolution(f"non-integral signature {a} for g={g}, r={r}, s={s}")
    a = tuple(int(x) for x in a)
    if sum(a) != r * s**g * math.factorial(g):
        raise NoIntegerSolution(
            f"signature {a} sums to {sum(a)}, expected {r * s**g * math.factorial(g)}"
        )
    for j in range(0, g - 1):
        for n in range(1, 2 * g + 6):
            lhs = sum(a[i - 1] * S(g - j, n - i + 1) for i in range(1, g + 1))
            if lhs != F(j, n, r, s, g):
                raise NoIntegerSolution(
                    f"signature {a} fails the identity at j={j}, n={n}"
                )
    return LevelSignature(a)


# -- module frame and elements ------------------------------------------------


class ModuleFrame:
    """Shared geometry for one module M_c: system, period matrix, divisor, c."""

    def __init__(self, sys, omega, c=None, rng=None):
        if sys.g != omega.g:
            raise DimensionMismatch("system/period dimension mismatch")
        self.sys = sys
        self.omega = omega
        self.divisor = scalar_theta(omega, sys.s)
        if c is None:
            if rng is None:
                raise DimensionMismatch("need either c or an rng to draw it")
            # a generic parameter near the origin keeps the numerator
            # evaluations well inside the certified-tail comfort zone
            c = 0.35 * omega.random_cell_points(rng, 1)[0]
        self.c = np.asarray(c, dtype=complex).reshape(omega.g)
        self._num_systems = {}

    @property
    def g(self):
        return self.sys.g

    def numerator_system(self, n):
        """Degree s*n multiplier system with the same matrices A_j."""
        if n not in self._num_systems:
            self._num_systems[n] = MultiplierSystem(
                self.sys.g, self.sys.r, self.sys.s * n, self.sys.A
            )
        return self._num_systems[n]

    def numerator_dim(self, n):
        return self.sys.r * (self.sys.s * n) ** self.g

    def rebased(self, delta):
        """Same module data with c shifted by delta (time/space re-basing)."""
        return ModuleFrame(self.sys, self.omega, c=self.c + np.asarray(delta))

    def gauge_weights(self, zs, tol=1e-12, guard=1e-8):
        """w_j(z) = (1/s) d_{z_j} log theta_div(z), shape (P, g)."""
        zs = np.asarray(zs, dtype=complex).reshape(-1, self.g)
        jet = log_theta_jet(self.divisor, zs, 1, tol=tol, guard=guard)
        cols = [jet.coeff(tuple(np.eye(self.g, dtype=int)[j])) for j in range(self.g)]
        return np.stack(cols, axis=-1) / self.sys.s


class BAElement:
    """One module element: level, numerator theta, optional prefactor jet."""

    def __init__(self, frame, level, seeds, prefactor=None):
        if level < 1:
            raise IndexOutOfRange(f"level must be >= 1, got {level}")
        self.frame = frame
        self.level = int(level)
        self.theta_num = VectorTheta(frame.numerator_system(level), frame.omega, seeds)
        self.prefactor = prefactor

    @property
    def seeds(self):
        return self.theta_num.seeds

    def rebased(self, frame):
        return BAElement(frame, self.level, self.theta_num.seeds, self.prefactor)


def make_element(frame, level, seeds=None, rng=None, prefactor=None):
    """Element of M_c at the given pole level.

    seeds may be omitted, in which case a random numerator is drawn from rng.
    """
    if seeds is None:
        if rng is None:
            raise DimensionMismatch("need either seeds or an rng to draw them")
        shape = ((frame.sys.s * level) ** frame.g, frame.sys.r)
        seeds = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return BAElement(frame, level, seeds, prefactor)


def element_jets(
    elements, zs, order, slots=None, gauged=None, tol=1e-12, guard=1e-8
):
    """Taylor jets of module elements at x = 0, batched over z-points.

    Parameters
    ----------
    elements : sequence of BAElement sharing one frame.
    zs : (P, g) complex points, off the divisor.
    order : jet order.
    slots : sequence of z-slot indices, one per jet variable (default 0..g-1).
        Several variables may displace the same slot; this is how the
        hierarchy times (which all displace slot g-k+j-1) are handled.
    gauged : per-variable flags; gauged variables carry the exponential
        factor exp(-x_v w_{slot(v)}(z)) (default: all gauged).

    Returns
    -------
    jets : list of Jet with coefficients (P, r, n).
    weights : (P, g) array of gauge weights w_j(z) for reuse by callers.
    """
    frame = elements[0].frame
    for e in elements:
        if e.frame is not frame:
            raise DimensionMismatch("elements from different frames")
    g = frame.g
    zs = np.asarray(zs, dtype=complex).reshape(-1, g)
    if slots is None:
        slots = list(range(g))
    slots = [int(v) for v in slots]
    if any(not 0 <= v < g for v in slots):
        raise IndexOutOfRange(f"slot indices must lie in 0..{g - 1}")
    if gauged is None:
        gauged = [True] * len(slots)
    space = JetSpace(len(slots), order)
    slot_mis, kmap, mult = shift_table(space, slots, g)

    weights = frame.gauge_weights(zs, tol=tol, guard=guard)
    gw = np.zeros((len(zs), len(slots)), dtype=complex)
    for v, (sv, flag) in enumerate(zip(slots, gauged)):
        if flag:
            gw[:, v] = -weights[:, sv]
    gauge = exp_linear_jet(space, gw)
    gauge3 = Jet(space, gauge.coeffs[:, None, :])

    div_vals = frame.divisor.guard(zs, threshold=guard, tol=tol)[:, 0]
    fact = np.array([_factorial_mi(mi) for mi in slot_mis], dtype=float)

    out = []
    for e in elements:
        sn = frame.sys.s * e.level
        w = zs + frame.c[None, :] / sn
        vals, _, _ = e.theta_num.evaluate_many(w, list(slot_mis), tol=tol)
        taylor = np.moveaxis(vals, 1, 2) / fact  # (P, r, D) normalized
        coeffs = taylor[..., kmap] * mult * (1.0 / sn) ** space.degrees
        jet = jet_mul(Jet(space, coeffs), gauge3)
        jet = Jet(space, jet.coeffs / div_vals[:, None, None] ** e.level)
        if e.prefactor is not None:
            pf = e.prefactor.truncated(min(order, e.prefactor.order))
            jet = jet_mul(jet, pf)
        out.append(jet)
    return out, weights


def evaluate_jet(element, zs, order, tol=1e-12, guard=1e-8):
    """Jet in all g x-variables of one element (gauge applied)."""
    jets, _ = element_jets([element], zs, order, tol=tol, guard=guard)
    return jets[0]


def covariant_derivative(jet, weights, var):
    """nabla_var = d/dx_var - w_var(z) applied to jet-evaluated element data."""
    lower = jet_derive(jet, var)
    damp = jet.truncated(jet.order - 1)
    w = np.asarray(weights)[:, var]
    return Jet(lower.space, lower.coeffs - w[:, None, None] * damp.coeffs)


def element_periodicity_residual(element, z, lam, order=1, tol=1e-12):
    """Defect of the lattice identity for f = theta_num(z+(x+c)/(sn))/div^n.

    Compares the x-jets (to the given order) of f(z + lam) against
    exp(-2 pi i <m, c+x>) A^m f(z); returns the relative residual.
    """
    frame = element.frame
    g = frame.g
    z = np.asarray(z, dtype=complex).reshape(1, g)
    lv = lam.vector(frame.omega)[None, :]
    ungauged = dict(gauged=[False] * g, tol=tol)
    lhs = element_jets([element], z + lv, order, **ungauged)[0][0]
    base = element_jets([element], z, order, **ungauged)[0][0]
    m = np.asarray(lam.m, dtype=float)
    word = frame.sys.word(lam.m)
    phase0 = np.exp(-2j * np.pi * (m @ frame.c))
    phase = exp_linear_jet(lhs.space, -2j * np.pi * m)
    rotated = np.einsum("ab,pbn->pan", word, base.coeffs)
    rhs = jet_mul(Jet(lhs.space, phase0 * rotated), Jet(lhs.space, phase.coeffs[None, None, :]))
    scale = max(np.max(np.abs(lhs.coeffs)), np.max(np.abs(rhs.coeffs)), 1e-300)
    return float(np.max(np.abs(lhs.coeffs - rhs.coeffs)) / scale)


def element_pole_slope(element, zd, direction, ts=(4e-2, 2e-2, 1e-2), tol=1e-12):
    """Log-log growth slope of the element value along a ray into the divisor.

    Expected close to -level for a generic ray hitting {theta_div = 0} at zd.
    """
    frame = element.frame
    direction = np.asarray(direction, dtype=complex).reshape(frame.g)
    pts = np.stack([zd + t * direction for t in ts])
    jets, _ = element_jets([element], pts, 0, tol=tol, guard=1e-14)
    mags = np.max(np.abs(jets[0].coeffs[:, :, 0]), axis=1)
    logs = np.log(mags)
    logt = np.log(np.asarray(ts))
    slope = np.polyfit(logt, logs, 1)[0]
    return float(slope)


# -- basis assembly with rank witnesses --------------------------------------


def assemble_basis(frame, rng, tries=10, extra_points=8, tol=1e-12, threshold=1e-8):
    """Random homogeneous basis of N elements, witnessed to generate levelwise.

    Draws a_n random numerators at each level n (signature counts) and checks,
    for every n <= g, that the values of {d^alpha(level <= n elements),
    |alpha| + level <= n} at random z-points have numerical rank F(0, n).
    Re-draws seeds on failure, up to `tries` attempts.
    """
    g = frame.g
    r, s = frame.sys.r, frame.sys.s
    sig = signature(g, r, s)
    levels = sig.levels()
    target = F(0, g, r, s, g)
    npts = target + extra_points
    last = None
    for _ in range(tries):
        elements = [make_element(frame, n, rng=rng) for n in levels]
        pts = 0.35 * frame.omega.random_cell_points(rng, npts)
        jets, _ = element_jets(elements, pts, g - 1, tol=tol)
        space = jets[0].space
        ok = True
        for n in range(1, g + 1):
            rows = []
            for e, jet in zip(elements, jets):
                if e.level > n:
                    continue
                for k, alpha in enumerate(space.exps):
                    if space.degrees[k] + e.level <= n:
                        rows.append(jet.coeffs[:, :, k].reshape(-1))
            mat = np.stack(rows)
            rank, _ = _rank(mat, threshold)
            want = F(0, n, r, s, g)
            if rank != want:
                ok = False
                last = (n, rank, want)
                break
        if ok:
            return elements
    raise GeneralPositionFailure(
        f"rank witness failed after {tries} draws: level {last[0]} rank "
        f"{last[1]} != {last[2]}"
    )


def rebase_basis(elements, delta):
    """The same basis elements over the frame with c shifted by delta."""
    frame = elements[0].frame.rebased(delta)
    return [e.rebased(frame) for e in elements]


# -- divisor-intersection sampling -------------------------------------------


@dataclass
class SubvarietySample:
    """Newton-converged points on an intersection of divisor translates."""

    points: np.ndarray  # (count, g)
    residuals: np.ndarray  # (count,) max_j |theta_j(z - a_j)|
    conditions: np.ndarray  # (count,) Jacobian condition numbers
    a_list: np.ndarray  # (k, g) the translation vectors

    @property
    def k(self):
        return self.a_list.shape[0]

    def to_csv(self, path):
        g = self.points.shape[1]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            header = []
            for j in range(g):
                header += [f"re_z{j}", f"im_z{j}"]
            writer.writerow(header + ["residual", "jacobian_cond"])
            for p, res, cond in zip(self.points, self.residuals, self.conditions):
                row = []
                for j in range(g):
                    row += [repr(float(p[j].real)), repr(float(p[j].imag))]
                writer.writerow(row + [repr(float(res)), repr(float(cond))])


def subvariety_sample(
    thetas,
    a_list,
    count,
    rng,
    residual_tol=1e-10,
    max_cond=1e6,
    oversample=20,
    newton_steps=25,
    tol=1e-13,
):
    """Sample points on the intersection of k theta-divisor translates.

    Solves theta_j(z - a_j) = 0 for j = 1..k by batched Newton iteration in
    the first k coordinates, with the remaining g-k coordinates frozen at
    random cell values per point (a random affine slice).  Points are reduced
    to the fundamental cell and re-polished before acceptance.
    """
    a_list = np.asarray(a_list, dtype=complex)
    k = len(thetas)
    if a_list.shape != (k, thetas[0].g):
        raise DimensionMismatch(f"need {k} translation vectors of length {thetas[0].g}")
    g = thetas[0].g
    if not 1 <= k < g - 1:
        raise DimensionMismatch(f"need 1 <= k < g-1, got k={k}, g={g}")
    omega = thetas[0].omega
    derivs = [(0,) * g] + [
        tuple(1 if i == v else 0 for i in range(g)) for v in range(k)
    ]

    def evaluate(z):
        fv = np.empty((len(z), k), dtype=complex)
        jac = np.empty((len(z), k, k), dtype=complex)
        for j, th in enumerate(thetas):
            vals, _, _ = th.evaluate_many(z - a_list[j], derivs, tol=tol)
            fv[:, j] = vals[:, 0, 0]
            jac[:, j, :] = vals[:, 1:, 0]
        return fv, jac

    def recenter(z):
        # lattice moves keep the intersection invariant; staying in the
        # centered cell keeps the batched evaluations well conditioned even
        # when a few trajectories wander
        u, v = omega.to_cell_coords(z)
        return (u - np.round(u)) + (v - np.round(v)) @ omega.matrix.T

    def newton(z, steps):
        z = recenter(z)
        fv, jac = evaluate(z)
        for _ in range(steps):
            try:
                step = np.linalg.solve(jac, fv[..., None])[..., 0]
            except np.linalg.LinAlgError:
                return z, None, None
            z = z.copy()
            z[:, :k] -= step
            z = recenter(z)
            fv, jac = evaluate(z)
            if np.max(np.abs(step)) < 1e-15:
                break
        return z, fv, jac

    points, residuals, conditions = [], [], []
    budget = oversample * count
    used = 0
    batch = max(count, 8)
    while len(points) < count and used < budget:
        take = min(batch, budget - used)
        used += take
        z = omega.random_cell_points(rng, take)
        z, _, _ = newton(z, newton_steps)
        z, fv, jac = newton(z, 4)
        if fv is None:
            continue
        res = np.max(np.abs(fv), axis=1)
        conds = np.linalg.cond(jac)
        good = (res < residual_tol) & (conds < max_cond) & np.isfinite(conds)
        for i in np.nonzero(good)[0]:
            if len(points) >= count:
                break
            points.append(z[i])
            residuals.append(res[i])
            conditions.append(conds[i])
    if not points:
        raise NewtonDivergence(
            f"no converged points on the intersection after {used} starts"
        )
    if len(points) < count:
        raise InsufficientPoints(
            f"only {len(points)}/{count} points after {oversample}x oversampling"
        )
    return SubvarietySample(
        np.stack(points), np.array(residuals), np.array(conditions), a_list
    )


# -- restriction and proof-split ranks ---------------------------------------


def _rank(mat, threshold):
    # row scales vary by orders of magnitude across pole levels; normalizing
    # rows keeps the relative singular-value threshold meaningful
    norms = np.linalg.norm(mat, axis=1)
    norms = np.where(norms == 0.0, 1.0, norms)
    sv = np.linalg.svd(mat / norms[:, None], compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0, sv
    return int(np.sum(sv > threshold * sv[0])), sv


def restriction_rank(frame, sample, n, threshold=1e-8, tol=1e-12):
    """Rank of the level-n section space restricted to the sample points.

    Columns are the unit-seed numerator basis of degree s*n (with parameter
    shift c/(sn)) divided by theta_div^n; rows are (point, component) pairs.
    The restriction is an epimorphism onto the level-n space of the
    intersection exactly when the rank equals F(k, n).
    """
    pts = np.asarray(sample.points, dtype=complex)
    sn = frame.sys.s * n
    num_sys = frame.numerator_system(n)
    vals = basis_values(num_sys, frame.omega, pts + frame.c[None, :] / sn, tol=tol)
    div = frame.divisor.guard(pts, tol=tol)[:, 0]
    mat = vals[:, 0, :, :] / div[:, None, None] ** n
    mat = mat.reshape(len(pts) * frame.sys.r, -1)
    rank, _ = _rank(mat, threshold)
    return rank


def proof_split_ranks(
    frame, elements, a1, rng, count=None, threshold=1e-8, tol=1e-12
):
    """Ranks of the two blocks in the level-(g+1) dimension split.

    The V-block collects derivatives of the basis elements in the last g-1
    x-variables with |alpha| + level <= g+1; the W-block collects
    theta_div(z - a1) times the degree-s*g numerator basis with parameter
    c + s*a1, all divided by theta_div(z)^{g+1}.  At generic z-points,
    rank(V) + rank(W) = F(0, g+1) witnesses the direct-sum split.

    Returns (rank_V, rank_W, rank_stacked).
    """
    g = frame.g
    n = g + 1
    r, s = frame.sys.r, frame.sys.s
    if count is None:
        count = 4 * F(0, n, r, s, g)
    pts = 0.45 * frame.omega.random_cell_points(rng, count)
    div = frame.divisor.guard(pts, tol=tol)[:, 0]

    slots = list(range(1, g))
    jets, _ = element_jets(elements, pts, g, slots=slots, tol=tol)
    space = jets[0].space
    v_rows = []
    for e, jet in zip(elements, jets):
        for k, alpha in enumerate(space.exps):
            if space.degrees[k] + e.level <= n:
                v_rows.append(jet.coeffs[:, :, k].reshape(-1))
    v_mat = np.stack(v_rows)

    a1 = np.asarray(a1, dtype=complex).reshape(g)
    shifted = frame.divisor.evaluate_many(pts - a1[None, :], tol=tol)[0][:, 0, 0]
    wn = n - 1
    num_sys = frame.numerator_system(wn)
    param = (frame.c + s * a1) / (s * wn)
    wvals = basis_values(num_sys, frame.omega, pts + param[None, :], tol=tol)
    w_mat = wvals[:, 0, :, :] * (shifted / div**n)[:, None, None]
    w_mat = w_mat.reshape(len(pts) * r, -1).T

    # per-point column scaling (the shared theta^-(g+1) factor dominates the
    # dynamic range); a diagonal scaling leaves all three ranks unchanged
    stacked = np.vstack([v_mat, w_mat])
    cnorm = np.linalg.norm(stacked, axis=0)
    cnorm = np.where(cnorm == 0.0, 1.0, cnorm)
    stacked = stacked / cnorm[None, :]
    rank_v, _ = _rank(stacked[: len(v_rows)], threshold)
    rank_w, _ = _rank(stacked[len(v_rows) :], threshold)
    rank_all, _ = _rank(stacked, threshold)
    return rank_v, rank_w, rank_all
