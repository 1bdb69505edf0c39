"""Matrix differential operators with jet coefficients.

An operator acts in a fixed number of variables on vectors of jet-valued
functions: (L phi)_i = sum_alpha sum_j (c_alpha)_{ij} d^alpha phi_j.  The
coefficients are N x N matrices of truncated Taylor jets at x = 0, all
sharing one jet space; every operation tracks the jet-order budget and fails
loudly when it is exhausted.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InsufficientJetOrder, ShapeMismatch
from .jets import Jet, JetSpace, jet_derive, jet_mul


def _as_matrix_jet(value, nmat, space):
    if isinstance(value, Jet):
        jet = value
    else:
        arr = np.asarray(value, dtype=complex)
        coeffs = np.zeros((nmat, nmat, space.n), dtype=complex)
        coeffs[:, :, 0] = arr
        jet = Jet(space, coeffs)
    if jet.coeffs.shape[:-1] != (nmat, nmat):
        raise ShapeMismatch(
            f"coefficient must be {nmat}x{nmat} matrix jet, got {jet.coeffs.shape}"
        )
    return jet


class MatrixDiffOp:
    """N x N matrix differential operator with jet coefficients at x = 0.

    Parameters
    ----------
    nmat : matrix size N.
    nvars : number of active variables.
    coeffs : mapping multi-index alpha -> (N, N) matrix jet (or plain matrix,
        promoted to a constant jet).  Identically zero coefficients are
        dropped; the order is the largest surviving |alpha|.
    jet_order : coefficient jet order J (required when all coefficients are
        plain matrices, otherwise inferred).
    """

    def __init__(self, nmat, nvars, coeffs, jet_order=None):
        if jet_order is None:
            jets = [c for c in coeffs.values() if isinstance(c, Jet)]
            if not jets:
                raise ShapeMismatch("jet_order required with constant coefficients")
            jet_order = jets[0].order
        space = JetSpace(nvars, jet_order)
        self.N = int(nmat)
        self.vars = int(nvars)
        self.jet_order = int(jet_order)
        self.space = space
        cleaned = {}
        for alpha, value in coeffs.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != nvars:
                raise ShapeMismatch(
                    f"multi-index {alpha} does not have {nvars} entries"
                )
            jet = _as_matrix_jet(value, self.N, space)
            if jet.space is not space:
                if jet.space.nvars != nvars or jet.order != jet_order:
                    raise ShapeMismatch(
                        "all coefficient jets must share vars and jet order"
                    )
            if np.any(jet.coeffs != 0.0):
                cleaned[alpha] = jet
        if not cleaned:
            zero = Jet(space, np.zeros((self.N, self.N, space.n), dtype=complex))
            cleaned[(0,) * nvars] = zero
        self.coeffs = cleaned
        self.order = max(sum(a) for a in cleaned)

    def coefficient(self, alpha):
        """The (N, N) matrix jet at alpha (zero jet if absent)."""
        alpha = tuple(int(a) for a in alpha)
        jet = self.coeffs.get(alpha)
        if jet is None:
            jet = Jet(self.space, np.zeros((self.N, self.N, self.space.n), complex))
        return jet

    def truncated(self, jet_order):
        """Same operator with coefficient jets truncated to jet_order."""
        return MatrixDiffOp(
            self.N,
            self.vars,
            {a: c.truncated(jet_order) for a, c in self.coeffs.items()},
            jet_order=jet_order,
        )

    def __add__(self, other):
        _check_compatible(self, other)
        J = min(self.jet_order, other.jet_order)
        out = {a: c.truncated(J).coeffs.copy() for a, c in self.coeffs.items()}
        for a, c in other.coeffs.items():
            if a in out:
                out[a] = out[a] + c.truncated(J).coeffs
            else:
                out[a] = c.truncated(J).coeffs.copy()
        space = JetSpace(self.vars, J)
        return MatrixDiffOp(
            self.N, self.vars, {a: Jet(space, v) for a, v in out.items()}, J
        )

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, scalar):
        return MatrixDiffOp(
            self.N,
            self.vars,
            {a: Jet(c.space, scalar * c.coeffs) for a, c in self.coeffs.items()},
            self.jet_order,
        )

    def __repr__(self):
        return (
            f"MatrixDiffOp(N={self.N}, vars={self.vars}, order={self.order}, "
            f"J={self.jet_order}, terms={len(self.coeffs)})"
        )


def _check_compatible(l1, l2):
    if l1.N != l2.N or l1.vars != l2.vars:
        raise ShapeMismatch(
            f"operator shapes differ: N={l1.N},vars={l1.vars} vs N={l2.N},vars={l2.vars}"
        )


def identity_op(nmat, nvars, jet_order):
    """The identity operator (alpha = 0, unit matrix, constant jet)."""
    space = JetSpace(nvars, jet_order)
    coeffs = np.zeros((nmat, nmat, space.n), dtype=complex)
    coeffs[:, :, 0] = np.eye(nmat)
    return MatrixDiffOp(nmat, nvars, {(0,) * nvars: Jet(space, coeffs)}, jet_order)


def derivative_op(var, nmat, nvars, jet_order):
    """d/dx_var times the identity matrix."""
    space = JetSpace(nvars, jet_order)
    coeffs = np.zeros((nmat, nmat, space.n), dtype=complex)
    coeffs[:, :, 0] = np.eye(nmat)
    alpha = tuple(1 if v == var else 0 for v in range(nvars))
    return MatrixDiffOp(nmat, nvars, {alpha: Jet(space, coeffs)}, jet_order)


def _derive_coeff(jet, mi):
    for v, k in enumerate(mi):
        for _ in range(k):
            jet = jet_derive(jet, v)
    return jet


def _mat_jet_mul(a, b):
    """Matrix product of two (N, N) matrix jets with jet multiplication."""
    left = Jet(a.space, a.coeffs[:, :, None, :])
    right = Jet(b.space, b.coeffs[None, :, :, :])
    prod = jet_mul(left, right)
    return Jet(prod.space, prod.coeffs.sum(axis=1))


def apply(l, phis):
    """Apply the operator to a sequence of N jet-valued components.

    Each component jet may carry arbitrary leading batch axes (points,
    vector components); the result is a list of N jets of order
    min(phi.order - L.order, J).
    """
    if len(phis) != l.N:
        raise ShapeMismatch(f"need {l.N} component jets, got {len(phis)}")
    phi_order = min(p.order for p in phis)
    out_order = min(phi_order - l.order, l.jet_order)
    if out_order < 0:
        raise InsufficientJetOrder(
            f"component jets of order {phi_order} cannot absorb operator order "
            f"{l.order}"
        )
    derived = {}
    out = [None] * l.N
    for alpha, cmat in l.coeffs.items():
        cmat = cmat.truncated(out_order)
        for j in range(l.N):
            key = (j, alpha)
            if key not in derived:
                derived[key] = _derive_coeff(phis[j], alpha).truncated(out_order)
            dphi = derived[key]
            for i in range(l.N):
                term = jet_mul(Jet(cmat.space, cmat.coeffs[i, j]), dphi)
                out[i] = term if out[i] is None else out[i] + term
    return out


def compose(l1, l2):
    """The operator product L1 L2 via the Leibniz expansion.

    The result has order L1.order + L2.order and coefficient jet order
    min(J2 - L1.order, J1): differentiating L2's coefficients consumes
    jet order.
    """
    _check_compatible(l1, l2)
    out_j = min(l2.jet_order - l1.order, l1.jet_order)
    if out_j < 0:
        raise InsufficientJetOrder(
            f"jet order {l2.jet_order} cannot absorb composition with order "
            f"{l1.order}"
        )
    space = JetSpace(l1.vars, out_j)
    acc = {}
    for alpha, c1 in l1.coeffs.items():
        c1t = c1.truncated(out_j)
        gammas = [
            mi
            for mi in JetSpace(l1.vars, sum(alpha)).exps
            if all(m <= a for m, a in zip(mi, alpha))
        ]
        for beta, c2 in l2.coeffs.items():
            for gamma in gammas:
                binom = 1
                for a, c in zip(alpha, gamma):
                    binom *= math.comb(a, c)
                diff = tuple(a - c for a, c in zip(alpha, gamma))
                dc2 = _derive_coeff(c2, diff).truncated(out_j)
                delta = tuple(b + c for b, c in zip(beta, gamma))
                term = binom * _mat_jet_mul(c1t, dc2).coeffs
                if delta in acc:
                    acc[delta] = acc[delta] + term
                else:
                    acc[delta] = term
    return MatrixDiffOp(
        l1.N, l1.vars, {d: Jet(space, v) for d, v in acc.items()}, out_j
    )


def commutator(l1, l2):
    """[L1, L2] = L1 L2 - L2 L1 at the common jet order."""
    return compose(l1, l2) - compose(l2, l1)


def op_norm(l, level=None):
    """Largest coefficient Frobenius norm.

    With level=None the maximum runs over all multi-indices and jet levels;
    an integer level restricts to coefficients of that jet degree (level 0 is
    the value at x = 0).
    """
    best = 0.0
    degrees = l.space.degrees
    for c in l.coeffs.values():
        if level is None:
            mask = slice(None)
        else:
            mask = degrees == level
        block = c.coeffs[..., mask]
        if block.size:
            best = max(best, float(np.max(np.linalg.norm(block, axis=(0, 1)))))
    return best


def op_norm_levels(l):
    """Per-jet-level breakdown of op_norm, as an array of length J + 1."""
    return np.array([op_norm(l, level=k) for k in range(l.jet_order + 1)])


def op_distance(l1, l2):
    """Largest entrywise difference of coefficient jets (equality surrogate).

    Operators are compared at the common jet order; coefficients missing on
    one side count with their full magnitude.
    """
    _check_compatible(l1, l2)
    J = min(l1.jet_order, l2.jet_order)
    best = 0.0
    for alpha in set(l1.coeffs) | set(l2.coeffs):
        c1 = l1.coefficient(alpha).truncated(J)
        c2 = l2.coefficient(alpha).truncated(J)
        best = max(best, float(np.max(np.abs(c1.coeffs - c2.coeffs))))
    return best


# -- dump format --------------------------------------------------------------


def dump_operator(l, path):
    """Write the operator as structured text with bit-exact float fields."""
    with open(path, "w") as fh:
        fh.write("thetaops-operator 1\n")
        fh.write(f"N {l.N}\n")
        fh.write(f"vars {l.vars}\n")
        fh.write(f"order {l.order}\n")
        fh.write(f"J {l.jet_order}\n")
        for alpha in sorted(l.coeffs):
            c = l.coeffs[alpha]
            astr = ",".join(str(a) for a in alpha)
            for i in range(l.N):
                for j in range(l.N):
                    for k, gamma in enumerate(c.space.exps):
                        val = c.coeffs[i, j, k]
                        if val == 0.0:
                            continue
                        gstr = ",".join(str(gg) for gg in gamma)
                        fh.write(
                            f"{astr} {i} {j} {gstr} "
                            f"{val.real!r} {val.imag!r}\n"
                        )


def load_operator(path):
    """Read an operator written by dump_operator (bit-exact round-trip)."""
    with open(path) as fh:
        magic = fh.readline().split()
        if magic[:1] != ["thetaops-operator"]:
            raise ShapeMismatch(f"not an operator dump: {path}")
        header = {}
        for _ in range(4):
            key, value = fh.readline().split()
            header[key] = int(value)
        nmat, nvars, jet_order = header["N"], header["vars"], header["J"]
        space = JetSpace(nvars, jet_order)
        coeffs = {}
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            alpha = tuple(int(a) for a in parts[0].split(","))
            i, j = int(parts[1]), int(parts[2])
            gamma = tuple(int(a) for a in parts[3].split(","))
            re, im = float(parts[4]), float(parts[5])
            if alpha not in coeffs:
                coeffs[alpha] = np.zeros((nmat, nmat, space.n), dtype=complex)
            coeffs[alpha][i, j, space.index[gamma]] = complex(re, im)
    jets = {a: Jet(space, v) for a, v in coeffs.items()}
    if not jets:
        jets = {
            (0,) * nvars: Jet(space, np.zeros((nmat, nmat, space.n), complex))
        }
    return MatrixDiffOp(nmat, nvars, jets, jet_order)
