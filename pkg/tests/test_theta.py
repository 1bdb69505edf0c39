"""Theta evaluation: frozen scalar values, certified tails, quasi-periodicity."""

from __future__ import annotations

import math

import numpy as np
import pytest

from thetaops.errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NearDivisor,
    TolTooSmall,
)
from thetaops.multipliers import trivial_system
from thetaops.riemann import LatticePoint, RiemannMatrix
from thetaops.theta import (
    VectorTheta,
    basis,
    basis_values,
    divisor_point,
    gram_rank,
    log_theta_derivative,
    meromorphic_function,
    quasi_periodicity_residual,
    scalar_theta,
    seed_tuples,
)


def _random_theta(sys, omega, rng):
    shape = (sys.s**sys.g, sys.r)
    seeds = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return VectorTheta(sys, omega, seeds)


def test_value_at_origin_closed_form(omega1):
    # sum of exp(-pi n^2) over the integers, known in closed form
    theta = scalar_theta(omega1)
    got = theta.evaluate(np.zeros(1), tol=1e-13)
    want = math.pi**0.25 / math.gamma(0.75)
    assert abs(got.value[0] - want) < 1e-10
    assert got.error_bound < 1e-13
    assert got.radius <= 4


def test_coefficient_frozen_value(omega1):
    # g=1, s=1, Omega=i: a_l = exp(pi i <l, i l>) a_0, so a_2 = e^{-4 pi}
    theta = scalar_theta(omega1)
    a2 = theta.coefficient([2])
    assert abs(a2[0] - math.exp(-4 * math.pi)) < 1e-16
    assert np.allclose(theta.coefficient([0]), [1.0])


def test_coefficient_recurrence(omega2, jordan22_s2, rng):
    # closed-form coefficients satisfy the one-step shift relation
    #   a_{q + s e_j} = exp(s pi i Omega_jj + 2 pi i <q, Omega e_j>) A_j^{-1} a_q
    theta = _random_theta(jordan22_s2, omega2, rng)
    s = theta.s
    om = omega2.matrix
    for _ in range(20):
        q = rng.integers(-6, 7, 2)
        for j in range(2):
            ej = np.eye(2, dtype=np.int64)[j]
            lhs = theta.coefficient(q + s * ej)
            phase = np.exp(s * np.pi * 1j * om[j, j] + 2j * np.pi * (q @ om[:, j]))
            rhs = phase * (jordan22_s2.matrix_power(j, -1) @ theta.coefficient(q))
            denom = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)), 1e-300)
            assert np.max(np.abs(lhs - rhs)) / denom < 1e-12


def test_derivatives_match_finite_differences(omega1b):
    theta = scalar_theta(omega1b)
    z = np.array([0.31 + 0.12j])
    h = 1e-5
    val = lambda x: theta.evaluate(np.array([x]), tol=1e-13).value[0]
    fd1 = (val(z[0] + h) - val(z[0] - h)) / (2 * h)
    fd2 = (val(z[0] + h) - 2 * val(z[0]) + val(z[0] - h)) / h**2
    d1 = theta.evaluate(z, deriv=(1,), tol=1e-13).value[0]
    d2 = theta.evaluate(z, deriv=(2,), tol=1e-13).value[0]
    assert abs(d1 - fd1) < 1e-6
    assert abs(d2 - fd2) < 1e-5


def test_vector_derivatives_match_finite_differences(omega2, jordan22, rng):
    theta = _random_theta(jordan22, omega2, rng)
    z = np.array([0.21 - 0.05j, -0.13 + 0.24j])
    h = 1e-5
    for j in range(2):
        ej = np.zeros(2)
        ej[j] = 1.0
        deriv = tuple(int(x) for x in ej)
        vp, _, _ = theta.evaluate_many((z + h * ej)[None], tol=1e-13)
        vm, _, _ = theta.evaluate_many((z - h * ej)[None], tol=1e-13)
        fd = (vp[0, 0] - vm[0, 0]) / (2 * h)
        dv, _, _ = theta.evaluate_many(z[None], [deriv], tol=1e-13)
        assert np.max(np.abs(dv[0, 0] - fd)) < 1e-6


def test_quasi_periodicity_trivial_and_jordan(omega2, scalar_sys2, jordan22, jordan22_s2, rng):
    for sys in (scalar_sys2, jordan22, jordan22_s2):
        theta = _random_theta(sys, omega2, rng)
        worst = 0.0
        for _ in range(30):
            z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            lam = LatticePoint(rng.integers(-2, 3, 2), rng.integers(-2, 3, 2))
            worst = max(worst, quasi_periodicity_residual(theta, z, lam, tol=1e-13))
        assert worst < 1e-9


def test_quasi_periodicity_genus_three(omega3, rng):
    theta = scalar_theta(omega3)
    worst = 0.0
    for _ in range(10):
        z = 0.5 * (rng.standard_normal(3) + 1j * rng.standard_normal(3))
        lam = LatticePoint(rng.integers(-1, 2, 3), rng.integers(-1, 2, 3))
        worst = max(worst, quasi_periodicity_residual(theta, z, lam, tol=1e-13))
    assert worst < 1e-9


def test_truncation_radius_small_for_unit_lattice(omega1):
    theta = scalar_theta(omega1)
    radius, bound = theta.truncation_radius(0.0, 1e-14)
    assert radius <= 4
    assert 0.0 <= bound < 1e-14


def test_truncation_radius_monotone_in_tol(omega2):
    theta = scalar_theta(omega2)
    r1, _ = theta.truncation_radius(0.5, 1e-6)
    r2, _ = theta.truncation_radius(0.5, 1e-14)
    assert r2 >= r1


def test_tol_too_small(rng):
    # nearly degenerate imaginary part: the cap is reached before the bound
    om = RiemannMatrix([[0.001j]])
    theta = scalar_theta(om)
    with pytest.raises(TolTooSmall):
        theta.truncation_radius(0.5, 1e-30)


def test_tail_certificate(omega1b, omega2, rng):
    # growing the box by 2 changes the value by less than the certificate
    for om in (omega1b, omega2):
        theta = scalar_theta(om)
        zs = om.random_cell_points(rng, 16)
        radius, bound = theta.truncation_radius(om.imag_radius(zs), 1e-10)
        seeds = theta.seeds[:, :, None]
        lo = theta._plan(radius).values(zs, [(0,) * om.g], seeds)
        hi = theta._plan(radius + 2).values(zs, [(0,) * om.g], seeds)
        assert np.max(np.abs(lo - hi)) <= max(bound, 1e-30)


def test_seed_tuples_order():
    assert seed_tuples(2, 2) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert seed_tuples(1, 3) == [(0, 0, 0)]


def test_seed_dict_matches_array(omega2, jordan22_s2):
    vec = np.array([1.0, 2.0j])
    a = VectorTheta(jordan22_s2, omega2, {(1, 0): vec})
    arr = np.zeros((4, 2), dtype=complex)
    arr[seed_tuples(2, 2).index((1, 0))] = vec
    b = VectorTheta(jordan22_s2, omega2, arr)
    z = np.array([[0.2 + 0.1j, -0.3 + 0.2j]])
    va, _, _ = a.evaluate_many(z)
    vb, _, _ = b.evaluate_many(z)
    assert np.allclose(va, vb)


def test_bad_seed_shape(omega2, jordan22_s2):
    with pytest.raises(DimensionMismatch):
        VectorTheta(jordan22_s2, omega2, np.zeros((3, 2)))


def test_deriv_validation(omega2):
    theta = scalar_theta(omega2)
    z = np.zeros((1, 2))
    with pytest.raises(IndexOutOfRange):
        theta.evaluate_many(z, [(4, 3)])
    with pytest.raises(DimensionMismatch):
        theta.evaluate_many(z, [(1,)])


def test_basis_size_and_gram_rank(omega2, rng):
    from thetaops.multipliers import jordan_example

    for r, s, dim in [(1, 2, 4), (2, 1, 2)]:
        sys = jordan_example(r, 2, [[0.5, 1.0]], s=s) if r > 1 else trivial_system(2, s)
        assert len(basis(sys, omega2)) == r * s**2
        rank, sv = gram_rank(sys, omega2, rng)
        assert rank == r * s**2
        assert sv[rank - 1] / sv[0] > 1e-8


def test_basis_values_match_individual(omega2, jordan22_s2, rng):
    zs = omega2.random_cell_points(rng, 3)
    block = basis_values(jordan22_s2, omega2, zs, tol=1e-13)  # (P, 1, r, B)
    elems = basis(jordan22_s2, omega2)
    assert block.shape == (3, 1, 2, 8)
    for b, elem in enumerate(elems):
        vals, _, _ = elem.evaluate_many(zs, tol=1e-13)
        scale = max(np.max(np.abs(vals)), 1e-300)
        assert np.max(np.abs(block[:, 0, :, b] - vals[:, 0, :])) / scale < 1e-12


def test_jet_matches_direct_derivatives(omega2, rng):
    theta = scalar_theta(omega2)
    zs = omega2.random_cell_points(rng, 2)
    jet = theta.jet_at(zs, 3, tol=1e-13)
    for m in [(0, 0), (1, 0), (2, 1), (0, 3)]:
        vals, _, _ = theta.evaluate_many(zs, [m], tol=1e-13)
        got = jet.derivative(m)[:, 0]
        scale = max(np.max(np.abs(vals)), 1e-300)
        assert np.max(np.abs(got - vals[:, 0, 0])) / scale < 1e-9


def test_log_derivative_matches_finite_difference(omega1b):
    theta = scalar_theta(omega1b)
    z = np.array([0.17 + 0.06j])
    h = 1e-5

    def logval(x):
        return np.log(theta.evaluate(np.array([x]), tol=1e-13).value[0])

    fd = (logval(z[0] + h) - logval(z[0] - h)) / (2 * h)
    got = log_theta_derivative(theta, z, (1,), tol=1e-13)
    assert abs(got - fd) < 1e-8
    fd2 = (logval(z[0] + h) - 2 * logval(z[0]) + logval(z[0] - h)) / h**2
    got2 = log_theta_derivative(theta, z, (2,), tol=1e-13)
    assert abs(got2 - fd2) < 1e-4 * max(1.0, abs(fd2))


def test_guard_raises_near_divisor(omega1):
    theta = scalar_theta(omega1)
    # the scalar theta for Omega = i vanishes at (1 + i)/2
    z0 = np.array([[0.5 + 0.5j]])
    assert abs(theta.evaluate(z0[0], tol=1e-13).value[0]) < 1e-12
    with pytest.raises(NearDivisor):
        theta.guard(z0 + 1e-12)
    with pytest.raises(NearDivisor):
        log_theta_derivative(theta, z0[0], (1,))


def test_divisor_point_newton(omega1b, omega2, rng):
    for om in (omega1b, omega2):
        theta = scalar_theta(om)
        z = divisor_point(theta, rng)
        val = theta.evaluate(z, tol=1e-13).value[0]
        assert abs(val) < 1e-10 * theta.scale()


def test_meromorphic_function_is_periodic(omega2, rng):
    coeffs = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    f = meromorphic_function(omega2, 2, coeffs)
    zs = omega2.random_cell_points(rng, 5) + 0.05j
    base = f(zs)
    for _ in range(5):
        lam = LatticePoint(rng.integers(-2, 3, 2), rng.integers(-2, 3, 2))
        shifted = f(zs + lam.vector(omega2))
        assert np.max(np.abs(shifted - base)) < 1e-8 * max(1.0, np.max(np.abs(base)))


def test_meromorphic_pole_order_probe(omega2, rng):
    # |f| grows like |t|^{-n} on a line hitting the divisor
    coeffs = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    f = meromorphic_function(omega2, 2, coeffs)
    zd = divisor_point(f.denominator, rng)
    w = np.array([0.31 + 0.1j, -0.22 + 0.05j])
    t = 2e-2
    v1 = abs(f((zd + t * w)[None])[0])
    v2 = abs(f((zd + (t / 2) * w)[None])[0])
    assert abs(v2 / v1 - 4.0) < 1.0


def test_meromorphic_algebra(omega2, rng):
    coeffs = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    f = meromorphic_function(omega2, 2, coeffs)
    assert f.pole_order == 2
    prod = f * f
    assert prod.pole_order == 4
    comb = 2.0 * f + 1.0
    assert comb.pole_order == 2
    zs = omega2.random_cell_points(rng, 4)
    assert np.allclose(prod(zs), f(zs) ** 2)
    assert np.allclose(comb(zs), 2.0 * f(zs) + 1.0)
