"""Truncated multivariate Taylor-jet arithmetic.

A jet holds the normalized Taylor coefficients

    c_alpha = (d^alpha f)(0) / alpha!

of an analytic function, for every multi-index alpha with |alpha| <= order.
Multi-indices are enumerated in graded lexicographic order and all jets over
the same (nvars, order) pair share one interned :class:`JetSpace`, which
precomputes the multiplication pairing (truncated Cauchy product) and the
formal-derivative index maps.

Coefficient arrays may carry leading batch dimensions; every operation
broadcasts over them.  Dense storage is intended for order <= 6 in <= 4
variables, which is the regime the rest of the package works in.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .errors import IndexOutOfRange, InsufficientJetOrder, VarCountMismatch

_SPACE_CACHE: dict[tuple[int, int], "JetSpace"] = {}


def multi_indices(nvars, order):
    """All exponent tuples with |alpha| <= order, graded lexicographic.

    Within one total degree the tuples are ordered lexicographically, so the
    enumeration starts (0,..,0), then the degree-1 indices e_1, e_2, ...
    """
    if nvars < 1 or order < 0:
        raise IndexOutOfRange(f"invalid multi-index range nvars={nvars} order={order}")
    out = []
    for total in range(order + 1):
        for head in itertools.combinations_with_replacement(range(nvars), total):
            alpha = [0] * nvars
            for v in head:
                alpha[v] += 1
            out.append(tuple(alpha))
    # combinations_with_replacement yields each degree block in lex order of
    # the variable lists, which is lex order of the exponent tuples reversed;
    # sort each degree block explicitly to pin the convention.
    out.sort(key=lambda a: (sum(a), tuple(-x for x in a)))
    return tuple(out)


def _factorial_mi(alpha):
    f = 1
    for a in alpha:
        f *= math.factorial(a)
    return f


class JetSpace:
    """Interned coefficient layout for jets in ``nvars`` variables.

    Attributes
    ----------
    nvars, order : int
    exps : tuple of multi-index tuples, graded lex order.
    n : number of stored coefficients.
    index : dict mapping multi-index tuple -> position.
    degrees : int array of total degrees per position.
    factorials : float array of alpha! per position.
    """

    def __new__(cls, nvars, order):
        key = (int(nvars), int(order))
        sp = _SPACE_CACHE.get(key)
        if sp is not None:
            return sp
        sp = object.__new__(cls)
        sp.nvars, sp.order = key
        sp.exps = multi_indices(*key)
        sp.n = len(sp.exps)
        sp.index = {a: i for i, a in enumerate(sp.exps)}
        sp.exps_arr = np.array(sp.exps, dtype=np.int64).reshape(sp.n, sp.nvars)
        sp.degrees = sp.exps_arr.sum(axis=1)
        sp.factorials = np.array([_factorial_mi(a) for a in sp.exps], dtype=float)
        sp._mul_table = None
        sp._deriv_tables = {}
        _SPACE_CACHE[key] = sp
        return sp

    def mul_table(self):
        """Per output position k: index arrays (i, j) with exps[i]+exps[j]=exps[k]."""
        if self._mul_table is None:
            table = []
            for k, gamma in enumerate(self.exps):
                ii, jj = [], []
                for i, alpha in enumerate(self.exps):
                    if all(a <= g for a, g in zip(alpha, gamma)):
                        beta = tuple(g - a for g, a in zip(gamma, alpha))
                        j = self.index.get(beta)
                        if j is not None:
                            ii.append(i)
                            jj.append(j)
                table.append((np.array(ii, dtype=np.intp), np.array(jj, dtype=np.intp)))
            self._mul_table = table
        return self._mul_table

    def deriv_table(self, var):
        """Index maps for d/dx_var into the order-1-lower space."""
        if not 0 <= var < self.nvars:
            raise IndexOutOfRange(f"variable {var} not in 0..{self.nvars - 1}")
        if var not in self._deriv_tables:
            lower = JetSpace(self.nvars, self.order - 1) if self.order > 0 else None
            if lower is None:
                self._deriv_tables[var] = None
            else:
                src, dst, mult = [], [], []
                for i, alpha in enumerate(self.exps):
                    if alpha[var] == 0:
                        continue
                    beta = list(alpha)
                    beta[var] -= 1
                    dst.append(lower.index[tuple(beta)])
                    src.append(i)
                    mult.append(alpha[var])
                self._deriv_tables[var] = (
                    np.array(dst, dtype=np.intp),
                    np.array(src, dtype=np.intp),
                    np.array(mult, dtype=float),
                )
        return self._deriv_tables[var]

    def __repr__(self):
        return f"JetSpace(nvars={self.nvars}, order={self.order})"


class Jet:
    """Taylor jet: a JetSpace plus a coefficient array of shape (..., space.n)."""

    __slots__ = ("space", "coeffs")

    def __init__(self, space, coeffs):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape[-1] != space.n:
            raise VarCountMismatch(
                f"coefficient array has {coeffs.shape[-1]} entries, space needs {space.n}"
            )
        self.space = space
        self.coeffs = coeffs

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, space, value):
        value = np.asarray(value, dtype=complex)
        coeffs = np.zeros(value.shape + (space.n,), dtype=complex)
        coeffs[..., 0] = value
        return cls(space, coeffs)

    @classmethod
    def variable(cls, space, var, base=0.0):
        """The jet of x_var + base."""
        if not 0 <= var < space.nvars:
            raise IndexOutOfRange(f"variable {var} not in 0..{space.nvars - 1}")
        coeffs = np.zeros(space.n, dtype=complex)
        coeffs[0] = base
        e = tuple(1 if v == var else 0 for v in range(space.nvars))
        coeffs[space.index[e]] = 1.0
        return cls(space, coeffs)

    # -- basic queries ------------------------------------------------------

    @property
    def order(self):
        return self.space.order

    def value(self):
        return self.coeffs[..., 0]

    def coeff(self, alpha):
        alpha = tuple(alpha)
        pos = self.space.index.get(alpha)
        if pos is None:
            raise IndexOutOfRange(f"multi-index {alpha} not stored at order {self.order}")
        return self.coeffs[..., pos]

    def derivative(self, alpha):
        """The derivative value d^alpha f(0) (coefficient times alpha!)."""
        return self.coeff(alpha) * _factorial_mi(tuple(alpha))

    def truncated(self, order):
        if order > self.order:
            raise InsufficientJetOrder(f"cannot extend order {self.order} to {order}")
        if order == self.order:
            return self
        target = JetSpace(self.space.nvars, order)
        return Jet(target, self.coeffs[..., : target.n].copy())

    # -- arithmetic ---------------------------------------------------------

    def _check_vars(self, other):
        if self.space.nvars != other.space.nvars:
            raise VarCountMismatch(
                f"jets over {self.space.nvars} and {other.space.nvars} variables"
            )

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check_vars(other)
            m = min(self.order, other.order)
            a, b = self.truncated(m), other.truncated(m)
            return Jet(a.space, a.coeffs + b.coeffs)
        return Jet(self.space, self.coeffs + Jet.constant(self.space, other).coeffs)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -np.asarray(other, dtype=complex))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return jet_mul(self, other)
        return Jet(self.space, self.coeffs * np.asarray(other, dtype=complex)[..., None])

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise IndexOutOfRange("jet powers take nonnegative integer exponents")
        out = Jet.constant(self.space, np.ones(self.coeffs.shape[:-1]))
        for _ in range(k):
            out = jet_mul(out, self)
        return out

    def derive(self, var):
        return jet_derive(self, var)

    def __repr__(self):
        return f"Jet(order={self.order}, nvars={self.space.nvars}, shape={self.coeffs.shape})"


def jet_mul(a, b):
    """Truncated Cauchy product; result order = min(a.order, b.order)."""
    a._check_vars(b)
    m = min(a.order, b.order)
    a, b = a.truncated(m), b.truncated(m)
    table = a.space.mul_table()
    shape = np.broadcast_shapes(a.coeffs.shape[:-1], b.coeffs.shape[:-1])
    out = np.empty(shape + (a.space.n,), dtype=complex)
    for k, (ii, jj) in enumerate(table):
        out[..., k] = np.sum(a.coeffs[..., ii] * b.coeffs[..., jj], axis=-1)
    return Jet(a.space, out)


def jet_derive(a, var):
    """Formal derivative d/dx_var; result order drops by one."""
    if a.order == 0:
        raise InsufficientJetOrder("cannot differentiate an order-0 jet")
    dst, src, mult = a.space.deriv_table(var)
    lower = JetSpace(a.space.nvars, a.order - 1)
    out = np.zeros(a.coeffs.shape[:-1] + (lower.n,), dtype=complex)
    out[..., dst] = a.coeffs[..., src] * mult
    return Jet(lower, out)


def _series_eval(a, coeffs_fn):
    """Sum c_k u^k with u = a - a(0); helper for exp/log/reciprocal."""
    u = Jet(a.space, a.coeffs.copy())
    u.coeffs[..., 0] = 0.0
    acc = Jet.constant(a.space, coeffs_fn(0) * np.ones(a.coeffs.shape[:-1]))
    power = None
    for k in range(1, a.order + 1):
        power = u if power is None else jet_mul(power, u)
        acc = acc + coeffs_fn(k) * power
    return acc


def jet_exp(a):
    """exp of a jet."""
    v = np.exp(a.value())
    out = _series_eval(a, lambda k: 1.0 / math.factorial(k))
    return Jet(a.space, out.coeffs * v[..., None])


def jet_log(a):
    """log of a jet; the value at the base point must be nonzero."""
    v = a.value()
    if np.any(v == 0):
        raise ZeroDivisionError("jet_log at a zero base value")
    scaled = Jet(a.space, a.coeffs / v[..., None])
    out = _series_eval(scaled, lambda k: 0.0 if k == 0 else (-1.0) ** (k + 1) / k)
    out.coeffs[..., 0] = np.log(v)
    return out


def jet_reciprocal(a):
    """1/a as a jet; the value at the base point must be nonzero."""
    v = a.value()
    if np.any(v == 0):
        raise ZeroDivisionError("jet_reciprocal at a zero base value")
    scaled = Jet(a.space, a.coeffs / v[..., None])
    out = _series_eval(scaled, lambda k: (-1.0) ** k)
    return Jet(a.space, out.coeffs / v[..., None])


def exp_linear_jet(space, weights):
    """Jet of exp(sum_v weights_v * x_v), batched over leading axes of weights.

    Closed form: the alpha coefficient is prod_v weights_v^alpha_v / alpha_v!.
    """
    w = np.asarray(weights, dtype=complex)
    if w.shape[-1] != space.nvars:
        raise VarCountMismatch(f"{w.shape[-1]} weights for {space.nvars} variables")
    out = np.empty(w.shape[:-1] + (space.n,), dtype=complex)
    for k, alpha in enumerate(space.exps):
        term = np.ones(w.shape[:-1], dtype=complex)
        for v, av in enumerate(alpha):
            if av:
                term = term * w[..., v] ** av / math.factorial(av)
        out[..., k] = term
    return Jet(space, out)


def shift_table(space, slot_map, nslots):
    """Tables for building the jet of Theta(w + sum_v x_v * e_{slot_map[v]}).

    Several jet variables may shift the same slot.  Returns
    ``(slot_mis, kmap, mult)`` where ``slot_mis`` lists the distinct slot
    multi-indices needed (tuples over nslots), ``kmap[k]`` is the position in
    ``slot_mis`` for space position k, and ``mult[k]`` is the integer ratio
    m!/alpha! arising from repeated slots.  Given Taylor-normalized slot
    derivatives D (..., len(slot_mis)), the jet coefficients are
    ``D[..., kmap] * mult * scale**degree``.
    """
    if len(slot_map) != space.nvars:
        raise VarCountMismatch(f"{len(slot_map)} slots for {space.nvars} variables")
    slot_set = {}
    kmap = np.empty(space.n, dtype=np.intp)
    mult = np.empty(space.n, dtype=float)
    for k, alpha in enumerate(space.exps):
        m = [0] * nslots
        for v, av in enumerate(alpha):
            m[slot_map[v]] += av
        m = tuple(m)
        pos = slot_set.setdefault(m, len(slot_set))
        kmap[k] = pos
        mult[k] = _factorial_mi(m) / _factorial_mi(alpha)
    slot_mis = [None] * len(slot_set)
    for m, pos in slot_set.items():
        slot_mis[pos] = m
    return tuple(slot_mis), kmap, mult
