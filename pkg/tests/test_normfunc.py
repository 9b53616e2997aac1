import math

import numpy as np
import pytest

from flatband.model import ModelParams, derive_constants, f_coeff
from flatband.normfunc import (
    PreconditionError, a_closed_qunit, b_backward, b_differences, b_forward,
    b_limit, b_split, b_value, beta_upper, c_recursive, convergence_envelope, d_closed, d_recursive,
    forward_A, g_minus, g_plus, g_tilde_direct, log_prefactor, normalization, ratio_bounds,
    truncated_norm_bound,
)
from flatband.normfunc import _g_tilde_minus, _g_tilde_plus
from flatband.oracle.gram import gram_determinant_A

# B(x, y, z) from the unrescaled recursion in 50-digit arithmetic, frozen
B_REF = [
    ((-3, 4, 1.25, 1.2, 0.5), 1.109266904022888),
    ((-6, 5, 0.6, 1.7, -3.3), 1.5041561887724283),
    ((0, 9, 2.0, 0.7, 2.0), 1.0343199084807503),
    ((-2, 10, 1.25, 1.2, 20.0), 1.1038055688024532),
]


def consts(lam=1.25, q=1.2, z=0.5, theta=0.0):
    p = ModelParams(lam=lam, q_abs=q, theta=theta, zeta_abs=q ** (-z))
    return p, derive_constants(p)


@pytest.mark.parametrize("args,ref", B_REF)
def test_b_frozen_values(args, ref):
    x, y, lam, q, z = args
    _, c = consts(lam, q, z)
    assert b_value(x, y, c.z, c) == pytest.approx(ref, rel=1e-13)


def test_boundary_values():
    _, c = consts()
    tab = b_forward(3, 10, c.z, c)
    assert tab(1) == 0.0 and tab(2) == 1.0
    bt = b_backward(-4, 3, c.z, c)
    assert bt(5) == 0.0 and bt(4) == 1.0


def test_forward_backward_agree():
    _, c = consts(0.6, 1.7, -3.3)
    fwd = b_forward(-7, 9, c.z, c)
    bwd = b_backward(-7, 9, c.z, c)
    assert fwd(9) == pytest.approx(bwd(-7), rel=1e-13)


def test_split_formula_matches_table():
    _, c = consts(2.0, 0.7, 2.0)
    whole = b_value(-5, 8, c.z, c)
    for w in range(-5, 9):
        assert b_split(-5, w, 8, c.z, c) == pytest.approx(whole, rel=1e-13)


def test_recursion_times_prefactor_is_gram_determinant():
    p, c = consts(1.25, 1.2, 0.5, theta=0.3)
    tab = b_forward(-4, 5, c.z, c)
    for y in range(-4, 6):
        assert log_prefactor(-4, y, p, c.r) + math.log(tab(y)) == pytest.approx(
            gram_determinant_A(-4, y, p), abs=1e-12)
    assert normalization(-4, 5, p, c).log_value == pytest.approx(gram_determinant_A(-4, 5, p), abs=1e-12)


def test_qunit_closed_form():
    p = ModelParams(lam=1.25, q_abs=1.0, zeta_abs=0.7)
    c = derive_constants(p)
    tab = b_forward(0, 30, c.z, c)
    for y in (0, 5, 30):
        closed = a_closed_qunit(0, y, p, c)
        assert tab(y) == pytest.approx(closed.b_value, rel=1e-13)
        n = y + 1
        explicit = (c.r * (1 + 0.49)) ** n * (1 - c.r ** (-2 * (n + 1))) / (1 - c.r ** -2)
        assert closed.value == pytest.approx(explicit, rel=1e-13)
    assert forward_A(0, 12, p, c) == pytest.approx(a_closed_qunit(0, 12, p, c).value, rel=1e-12)


def test_fault_injection_changes_values():
    _, c = consts()
    assert b_forward(0, 10, c.z, c, perturb=1e-6)(10) != b_forward(0, 10, c.z, c)(10)


def test_bad_window():
    _, c = consts()
    with pytest.raises(PreconditionError):
        b_forward(0, -3, c.z, c)


def test_differences_match_table():
    _, c = consts(1.25, 1.2, 2.0)
    tab = b_forward(-2, 20, c.z, c)
    d = b_differences(-2, 20, c.z, c)
    np.testing.assert_allclose(d[:8], np.diff(tab.values[1:])[:8], rtol=1e-10)
    assert np.all(d >= 0)


def test_b_increasing_and_bounded_by_d():
    _, c = consts(0.6, 1.7, 0.5)
    tab = b_forward(-10, 30, c.z, c)
    assert np.all(np.diff(tab.values[1:]) >= -1e-15)
    g = c.f0
    d = d_recursive(42, g, c)
    np.testing.assert_allclose(d[:12], [d_closed(n, g, c) for n in range(12)], rtol=1e-12)
    ct = c_recursive(-10, 30, c.z, g, c)
    assert np.all(tab.values <= ct.values * (1 + 1e-13))


def test_c_recursion_needs_dominating_g():
    _, c = consts(0.6, 1.7, 0.5)
    with pytest.raises(PreconditionError):
        c_recursive(-5, 5, c.z, 0.1 * c.f0, c)


def test_ratio_bounds_closed_vs_direct_sums():
    # the closed forms sum the exponential envelope of f exactly, in all three wall positions
    for q, z in ((1.2, 0.5), (1.7, 2.3), (3.0, -1.0), (0.6, 0.0)):
        _, c = consts(1.25, q, z)
        for x, y in ((-6, 8), (3, 9), (-12, -4), (-3, 12)):
            assert _g_tilde_plus(x, y, c.z, c) == pytest.approx(g_tilde_direct(x, y, c.z, c, "+"), rel=1e-12)
            assert _g_tilde_minus(x, y, c.z, c) == pytest.approx(g_tilde_direct(x, y, c.z, c, "-"), rel=1e-12)
            # envelope sums dominate the sums of f itself
            assert g_tilde_direct(x, y, c.z, c, "+", envelope=False) <= g_tilde_direct(x, y, c.z, c, "+")
        rb = ratio_bounds(-6, 8, c.z, c)
        assert rb.g_plus == pytest.approx(g_plus(-6, 8, c.z, c))
        assert rb.g_minus == pytest.approx(g_minus(-6, 8, c.z, c))


def test_ratio_bounds_hold():
    _, c = consts(1.25, 1.2, 0.5)
    tab = b_forward(-8, 20, c.z, c)
    for y in range(-7, 20):
        ratio = tab(y) / tab(y + 1)
        assert 1 - g_plus(-8, y, c.z, c) - 1e-14 <= ratio <= 1
        assert ratio > c.r ** 2 / (1 + c.r ** 2)


def test_g_caps():
    _, c = consts()
    assert g_plus(0, -2, c.z, c) == 1.0
    assert g_plus(0, 0, c.z, c) == pytest.approx(1 / (c.r ** 2 + 1))


def test_inversion_invariance():
    _, c = consts(1.25, 1.7, 0.8)
    _, ci = consts(1.25, 1 / 1.7, 0.8)
    np.testing.assert_allclose(b_forward(-5, 15, c.z, c).values, b_forward(-5, 15, ci.z, ci).values,
                               rtol=1e-13)


def test_envelope_and_limits():
    _, c = consts(1.25, 1.2, 0.5)
    env = convergence_envelope(0, c.z, c)
    assert 0 < env.beta < 1 and env.beta <= beta_upper(1.2) + 1e-15
    d = b_differences(0, 100, c.z, c)
    assert np.all(d <= env.bound(np.arange(len(d))) * (1 + 1e-12))
    for direction in ("right", "left", "both"):
        res = b_limit(0, c.z, direction, c)
        assert res.error < 1e-10
    # right limit is the large-window value
    assert b_limit(0, c.z, "right", c).value == pytest.approx(b_value(0, 400, c.z, c), rel=1e-13)
    # "both" is shift-invariant up to translation of the wall
    assert b_limit(3, c.z, "both", c).value == pytest.approx(b_limit(-3, c.z, "both", c).value, rel=1e-12)


def test_limit_qunit_uses_closed_form():
    p = ModelParams(lam=1.25, q_abs=1.0)
    c = derive_constants(p)
    res = b_limit(0, c.z, "right", c)
    assert res.value == pytest.approx(1 / (1 - c.r ** -2), rel=1e-14)


def test_limit_rejects_bad_direction():
    _, c = consts()
    with pytest.raises(ValueError):
        b_limit(0, c.z, "up", c)


def test_truncated_norm_bound_is_finite_and_positive():
    _, c = consts(1.25, 1.2, 0.5)
    v = truncated_norm_bound(0, 5, c.z, c)
    assert 0 < v < math.inf


def test_interval_table_csv(tmp_path):
    p, c = consts()
    tab = b_forward(0, 5, c.z, c)
    out = tmp_path / "b.csv"
    tab.to_csv(out, p)
    lines = out.read_text().splitlines()
    assert lines[0].split(",")[:2] == ["y", "B"]
    assert len(lines) == 1 + 8
