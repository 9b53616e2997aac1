"""Structural invariants checked on random parameters."""

import math

import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st

from flatband.model import ModelParams, Site, derive_constants, f_coeff
from flatband.normfunc import (b_differences, b_forward, b_value, convergence_envelope, g_minus,
                               g_plus)
from flatband.observables import GroundState, density_bounds
from flatband.oracle.hamiltonian import apply_hamiltonian_dd
from flatband.oracle.states import construct_psi

lams = st.floats(0.3, 2.5)
qs = st.one_of(st.floats(0.4, 0.95), st.floats(1.05, 3.0))
zs = st.floats(-8.0, 8.0)
thetas = st.floats(-math.pi, math.pi)
ends = st.integers(-10, 10)


def consts(lam, q, z):
    return derive_constants(ModelParams(lam=lam, q_abs=q, zeta_abs=q ** (-z)))


@given(st.integers(-400, 400))
def test_site_roundtrip(h):
    s = Site(h)
    assert Site.from_coord(s.x) == s
    assert s.is_integer == (h % 2 == 0)


@given(st.floats(-30, 30), qs)
def test_f_even_and_bounded(u, q):
    assert f_coeff(u, q) == f_coeff(-u, q)
    assert 0 <= f_coeff(u, q) <= f_coeff(0.0, q) * (1 + 1e-14)
    assert math.isclose(f_coeff(u, q), f_coeff(u, 1 / q), rel_tol=1e-12, abs_tol=1e-300)


@given(lams, qs, zs, ends, st.integers(0, 25))
def test_b_monotone_positive(lam, q, z, x, n):
    c = consts(lam, q, z)
    v = b_forward(x, x + n, c.z, c).values[1:]
    assert np.all(v > 0)
    assert np.all(np.diff(v) >= -1e-14 * v[1:])


@given(lams, qs, zs, ends, st.integers(0, 20), st.integers(-6, 6))
def test_b_translation_covariant(lam, q, z, x, n, u):
    c = consts(lam, q, z)
    cu = consts(lam, q, z + u)
    assert math.isclose(b_value(x, x + n, c.z, c), b_value(x + u, x + n + u, cu.z, cu), rel_tol=1e-12)


@given(lams, qs, zs, ends, st.integers(0, 20))
def test_b_mirror_symmetric(lam, q, z, x, n):
    c = consts(lam, q, z)
    cm = consts(lam, q, -z)
    assert math.isclose(b_value(x, x + n, c.z, c), b_value(-x - n, -x, cm.z, cm), rel_tol=1e-12)


@given(lams, qs, zs, ends, st.integers(0, 20))
def test_b_inversion_invariant(lam, q, z, x, n):
    c = consts(lam, q, z)
    ci = consts(lam, 1 / q, z)
    assert math.isclose(b_value(x, x + n, c.z, c), b_value(x, x + n, ci.z, ci), rel_tol=1e-12)


@given(lams, qs, zs, ends, st.integers(1, 25))
def test_ratio_bounds(lam, q, z, x, n):
    c = consts(lam, q, z)
    y = x + n
    right = b_value(x, y, c.z, c) / b_value(x, y + 1, c.z, c)
    left = b_value(x, y, c.z, c) / b_value(x - 1, y, c.z, c)
    floor = c.r ** 2 / (1 + c.r ** 2)
    assert 1 - g_plus(x, y, c.z, c) - 1e-13 <= right <= 1 + 1e-13
    assert 1 - g_minus(x, y, c.z, c) - 1e-13 <= left <= 1 + 1e-13
    assert right > floor - 1e-13 and left > floor - 1e-13


@given(st.floats(0.3, 2.5), st.one_of(st.floats(0.4, 0.9), st.floats(1.1, 3.0)), zs, ends)
def test_differences_under_envelope(lam, q, z, x):
    c = consts(lam, q, z)
    env = convergence_envelope(x, c.z, c)
    assert env.beta < 1
    d = b_differences(x, x + 60, c.z, c)
    assert np.all(d <= env.bound(np.arange(len(d))) * (1 + 1e-12))


@given(lams, qs, thetas, st.floats(0.0, 3.0), thetas, st.sampled_from([3, 5, 9, 21]))
def test_one_point_identities(lam, q, theta, za, zphase, L):
    p = ModelParams(lam=lam, q_abs=q, theta=theta, zeta_abs=za, zeta_phase=zphase)
    gs = GroundState(p, L)
    total = 0.0
    for s in gs.sites():
        n = gs.density(s)
        total += n
        s2 = gs.spin(s, 1) ** 2 + gs.spin(s, 2) ** 2 + gs.spin(s, 3) ** 2
        assert math.isclose(s2, (n / 2) ** 2, rel_tol=1e-12, abs_tol=1e-15)
        assert -1e-14 <= n <= 2
        lo, hi = density_bounds(gs, s)
        assert lo - 1e-12 <= n <= hi + 1e-12
    assert math.isclose(total, L, rel_tol=1e-11)


@given(lams, qs, thetas, st.floats(0.05, 3.0), thetas)
def test_zero_energy_l3(lam, q, theta, za, zphase):
    p = ModelParams(lam=lam, q_abs=q, theta=theta, zeta_abs=za, zeta_phase=zphase)
    psi = construct_psi(p, 3)
    assume(psi.norm2() > 1e-8)
    assert apply_hamiltonian_dd(p, psi).norm2() <= 1e-22 * psi.norm2() * max(1.0, lam ** 4, q ** 2, q ** -2)


@given(lams, qs, thetas, st.floats(0.05, 3.0), st.integers(-4, 4), st.integers(-4, 4))
def test_electron_two_point_hermitian(lam, q, theta, za, x, y):
    assume(x != y)
    gs = GroundState(ModelParams(lam=lam, q_abs=q, theta=theta, zeta_abs=za), 11)
    a = gs.electron_two_point(x, y, "up", "down")
    b = gs.electron_two_point(y, x, "down", "up")
    assert abs(a - np.conj(b)) <= 1e-14 * max(1.0, abs(a))
