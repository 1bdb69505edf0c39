from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from thetaops.bamodule import (
    BAElement,
    F,
    ModuleFrame,
    S,
    assemble_basis,
    covariant_derivative,
    element_jets,
    element_periodicity_residual,
    element_pole_slope,
    evaluate_jet,
    make_element,
    proof_split_ranks,
    restriction_rank,
    signature,
    subvariety_sample,
)
from thetaops.errors import DimensionMismatch, IndexOutOfRange
from thetaops.jets import Jet, exp_linear_jet, jet_derive, jet_mul
from thetaops.multipliers import trivial_system
from thetaops.riemann import LatticePoint
from thetaops.theta import divisor_point, scalar_theta


def brute_monomial_count(g, n):
    if n <= 0:
        return 0
    count = 0
    for exps in itertools.product(range(n), repeat=g):
        if sum(exps) <= n - 1:
            count += 1
    return count


def test_monomial_count_matches_brute_force():
    for g in range(1, 6):
        for n in range(-2, 9):
            assert S(g, n) == brute_monomial_count(g, n)


def test_monomial_count_small_values():
    assert S(1, 5) == 5
    assert S(2, 3) == 6
    assert S(3, 2) == 4
    assert S(2, 0) == 0


def test_level_dimensions_examples():
    for n in range(1, 8):
        assert F(0, n, 1, 1, 2) == n * n
        assert F(1, n, 1, 1, 3) == 3 * n * n - 3 * n + 1
    for g in range(1, 5):
        for j in range(g):
            assert F(j, 1, 2, 3, g) == 2 * 3**g


def test_level_dimensions_telescope():
    rng = np.random.default_rng(11)
    for _ in range(60):
        g = int(rng.integers(1, 6))
        j = int(rng.integers(0, g))
        n = int(rng.integers(-1, 9))
        r = int(rng.integers(1, 4))
        s = int(rng.integers(1, 4))
        if j + 1 <= g - 1:
            assert F(j + 1, n, r, s, g) == F(j, n, r, s, g) - F(j, n - 1, r, s, g)
        assert isinstance(F(j, n, r, s, g), int)


def test_level_dimensions_range_checks():
    with pytest.raises(IndexOutOfRange):
        F(-1, 3, 1, 1, 2)
    with pytest.raises(IndexOutOfRange):
        F(2, 3, 1, 1, 2)
    with pytest.raises(IndexOutOfRange):
        S(0, 3)


def test_signature_frozen_values():
    assert signature(2, 1, 1).a == (1, 1)
    assert signature(3, 1, 1).a == (1, 4, 1)
    assert signature(1, 1, 1).a == (1,)
    assert signature(1, 2, 3).a == (6,)


def test_signature_totals_and_levels():
    for g in (1, 2, 3):
        for r in (1, 2):
            for s in (1, 2):
                sig = signature(g, r, s)
                assert sig.total == r * s**g * math.factorial(g)
                levels = sig.levels()
                assert len(levels) == sig.total
                assert levels == sorted(levels)
                assert all(1 <= n <= g for n in levels)


def test_signature_identity_holds_externally():
    sig = signature(3, 1, 1)
    for j in range(2):
        for n in range(1, 12):
            lhs = sum(
                sig.a[i - 1] * S(3 - j, n - i + 1) for i in range(1, 4)
            )
            assert lhs == F(j, n, 1, 1, 3)


@pytest.fixture(scope="module")
def frame2(omega2):
    rng = np.random.default_rng(9021)
    return ModuleFrame(trivial_system(2, 1), omega2, rng=rng)


@pytest.fixture(scope="module")
def frame3(omega3):
    rng = np.random.default_rng(9022)
    return ModuleFrame(trivial_system(3, 1), omega3, rng=rng)


def test_element_periodicity_scalar(frame2, rng):
    for level in (1, 2):
        elem = make_element(frame2, level, rng=rng)
        z = 0.3 * frame2.omega.random_cell_points(rng, 1)[0]
        for n, m in [((1, 0), (0, 0)), ((0, 0), (1, 0)), ((0, -1), (0, 1)),
                     ((1, 1), (-1, 1))]:
            lam = LatticePoint(n, m)
            res = element_periodicity_residual(elem, z, lam, order=1)
            assert res < 1e-8


def test_element_periodicity_jordan(jordan22, omega2, rng):
    frame = ModuleFrame(jordan22, omega2, rng=rng)
    elem = make_element(frame, 1, rng=rng)
    z = 0.3 * omega2.random_cell_points(rng, 1)[0]
    for m in [(1, 0), (0, 1), (-1, 1)]:
        res = element_periodicity_residual(elem, z, LatticePoint((0, 0), m), order=1)
        assert res < 1e-8


def element_value(elem, z, x, tol=1e-12):
    # direct evaluation of the gauged element at displacement x, no jets
    frame = elem.frame
    sn = frame.sys.s * elem.level
    w = frame.gauge_weights(z[None, :], tol=tol)[0]
    pt = (z + (np.asarray(x) + frame.c) / sn)[None, :]
    vals, _, _ = elem.theta_num.evaluate_many(pt, tol=tol)
    div = frame.divisor.evaluate_many(z[None, :], tol=tol)[0][0, 0, 0]
    return vals[0, 0, :] * np.exp(-np.sum(np.asarray(x) * w)) / div**elem.level


def test_evaluate_jet_matches_finite_differences(frame2, rng):
    elem = make_element(frame2, 2, rng=rng)
    z = 0.3 * frame2.omega.random_cell_points(rng, 1)[0]
    jet = evaluate_jet(elem, z[None, :], 2)
    h = 1e-4
    e = np.eye(2)
    v0 = element_value(elem, z, (0.0, 0.0))
    assert np.allclose(jet.coeff((0, 0))[0], v0, rtol=1e-9, atol=1e-12)
    for j in range(2):
        fd = (element_value(elem, z, h * e[j]) - element_value(elem, z, -h * e[j])) / (
            2 * h
        )
        jd = jet.derivative(tuple(np.eye(2, dtype=int)[j]))[0]
        assert np.allclose(fd, jd, rtol=1e-5, atol=1e-8)
    fd2 = (
        element_value(elem, z, (h, h))
        - element_value(elem, z, (h, -h))
        - element_value(elem, z, (-h, h))
        + element_value(elem, z, (-h, -h))
    ) / (4 * h * h)
    assert np.allclose(fd2, jet.derivative((1, 1))[0], rtol=1e-4, atol=1e-6)
    fdp = (
        element_value(elem, z, (h, 0))
        - 2 * v0
        + element_value(elem, z, (-h, 0))
    ) / (h * h)
    assert np.allclose(fdp, jet.derivative((2, 0))[0], rtol=1e-4, atol=1e-6)


def test_gauge_cancels_first_derivative_of_theta_element(frame2, rng):
    # level 1 with the divisor theta itself as numerator and c = 0: the value
    # of each first x-derivative vanishes, the gauge eats the log-derivative
    frame = ModuleFrame(frame2.sys, frame2.omega, c=np.zeros(2))
    elem = BAElement(frame, 1, np.array([[1.0]]))
    z = 0.3 * frame.omega.random_cell_points(rng, 4)
    jet = evaluate_jet(elem, z, 1)
    assert np.allclose(jet.coeff((0, 0)), 1.0, rtol=1e-10)
    assert np.max(np.abs(jet.coeff((1, 0)))) < 1e-9
    assert np.max(np.abs(jet.coeff((0, 1)))) < 1e-9


def test_covariant_derivative_linear_flat_and_annihilating(frame2, rng):
    phi = make_element(frame2, 1, rng=rng)
    psi = make_element(frame2, 2, rng=rng)
    pts = 0.3 * frame2.omega.random_cell_points(rng, 5)
    jets, w = element_jets([phi, psi], pts, 3)
    a, b = 0.7 - 0.2j, 1.1 + 0.9j
    combo = Jet(jets[0].space, a * jets[0].coeffs + b * jets[1].coeffs)
    lhs = covariant_derivative(combo, w, 0)
    rhs = a * covariant_derivative(jets[0], w, 0).coeffs + b * covariant_derivative(
        jets[1], w, 0
    ).coeffs
    assert np.allclose(lhs.coeffs, rhs, rtol=1e-13, atol=1e-13)

    d12 = covariant_derivative(covariant_derivative(jets[1], w, 0), w, 1)
    d21 = covariant_derivative(covariant_derivative(jets[1], w, 1), w, 0)
    scale = np.max(np.abs(d12.coeffs))
    assert np.max(np.abs(d12.coeffs - d21.coeffs)) < 1e-9 * scale

    flat = exp_linear_jet(jets[0].space, w)
    flat3 = Jet(flat.space, flat.coeffs[:, None, :])
    for var in range(2):
        killed = covariant_derivative(flat3, w, var)
        assert np.max(np.abs(killed.coeffs)) < 1e-12 * np.max(np.abs(flat.coeffs))


def test_gauge_intertwines_plain_and_covariant_derivative(frame2, rng):
    elem = make_element(frame2, 2, rng=rng)
    pts = 0.3 * frame2.omega.random_cell_points(rng, 4)
    gauged, w = element_jets([elem], pts, 3)
    plain, _ = element_jets([elem], pts, 3, gauged=[False, False])
    for var in range(2):
        lhs = jet_derive(gauged[0], var)
        gamma = exp_linear_jet(lhs.space, -w)
        nabla = covariant_derivative(plain[0], w, var)
        rhs = jet_mul(nabla, Jet(lhs.space, gamma.coeffs[:, None, :]))
        scale = np.max(np.abs(lhs.coeffs))
        assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) < 1e-9 * scale


def test_element_pole_slopes(frame2, rng):
    zd = divisor_point(frame2.divisor, rng)
    direction = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    direction /= np.linalg.norm(direction)
    for level in (1, 2):
        elem = make_element(frame2, level, rng=rng)
        slope = element_pole_slope(elem, zd, direction)
        assert abs(slope - (-level)) < 0.15


def test_assemble_basis_g2(frame2, rng):
    basis = assemble_basis(frame2, rng)
    assert [e.level for e in basis] == [1, 2]


def test_assemble_basis_g3(frame3, rng):
    basis = assemble_basis(frame3, rng)
    assert [e.level for e in basis] == [1, 2, 2, 2, 2, 3]


def test_subvariety_sample_and_csv(frame3, rng, tmp_path):
    theta = frame3.divisor
    a1 = frame3.omega.random_cell_points(rng, 1)[0]
    sample = subvariety_sample([theta], a1[None, :], 10, rng)
    assert sample.points.shape == (10, 3)
    assert np.all(sample.residuals < 1e-10)
    assert np.all(np.isfinite(sample.conditions))
    vals, _, _ = theta.evaluate_many(sample.points - a1[None, :])
    assert np.max(np.abs(vals[:, 0, 0])) < 1e-9

    path = tmp_path / "sample.csv"
    sample.to_csv(path)
    rows = path.read_text().strip().splitlines()
    assert rows[0].split(",")[:2] == ["re_z0", "im_z0"]
    assert len(rows) == 11
    first = [float(t) for t in rows[1].split(",")]
    assert first[0] == sample.points[0, 0].real
    assert first[-2] == sample.residuals[0]


def test_subvariety_preconditions(frame2, frame3, rng):
    with pytest.raises(DimensionMismatch):
        subvariety_sample([frame2.divisor], np.zeros((1, 2)), 4, rng)
    with pytest.raises(DimensionMismatch):
        subvariety_sample(
            [frame3.divisor, frame3.divisor], np.zeros((2, 3)), 4, rng
        )


def test_restriction_ranks_on_divisor_translate(frame3, rng):
    a1 = frame3.omega.random_cell_points(rng, 1)[0]
    sample = subvariety_sample([frame3.divisor], a1[None, :], 40, rng)
    assert restriction_rank(frame3, sample, 2) == F(1, 2, 1, 1, 3) == 7
    assert restriction_rank(frame3, sample, 3) == F(1, 3, 1, 1, 3) == 19


def test_proof_split_ranks(frame3, rng):
    basis = assemble_basis(frame3, rng)
    a1 = frame3.omega.random_cell_points(rng, 1)[0]
    rank_v, rank_w, rank_all = proof_split_ranks(frame3, basis, a1, rng)
    assert rank_v == 37
    assert rank_w == 27
    assert rank_all == 64 == F(0, 4, 1, 1, 3)


def test_signature_rejects_bad_parameters():
    with pytest.raises(IndexOutOfRange):
        signature(2, 0, 1)
    with pytest.raises(IndexOutOfRange):
        signature(0, 1, 1)
