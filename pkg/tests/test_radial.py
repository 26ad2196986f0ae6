"""Radial shooting, bisection boundary matching, saturation constants."""

import numpy as np
import pytest

from dnlab.radial import (BracketError, RadialError, ball_bound,
                          energy_inequality_violation, poly_profile,
                          saturation_constants, saturation_sweep, shoot,
                          solve_radial_bvp, tail_integral)

# Frozen oracle: I(2) = int_1^inf ds/sqrt(s^4 - 1) by a 4e6-cell midpoint
# Riemann sum on s = 1 + t^2 over t in [0, 40] plus the analytic tail
# 1/s0 + 1/(10 s0^5); cross-checked against adaptive quadrature to 1.4e-12.
TAIL_INTEGRAL_2 = 1.311028777145


def test_tail_integral_against_frozen_oracle():
    assert tail_integral(2.0) == pytest.approx(TAIL_INTEGRAL_2, abs=1e-9)


def test_saturation_constants_closed_forms():
    c = saturation_constants(1.0, 2.0, 2)
    assert c.mu0 == pytest.approx(np.sqrt(32.0), rel=1e-14)
    # C0 = (2 sqrt((2+eps)/delta) I(eps))^(1/eps) with eps = 2
    assert c.c0 == pytest.approx(np.sqrt(4.0 * TAIL_INTEGRAL_2), abs=1e-9)
    assert c.bound == max(c.mu0, c.c0)
    with pytest.raises(RadialError):
        saturation_constants(-1.0, 2.0, 2)


def test_ball_bound_rescales_delta():
    # radius-R ball behaves like the unit ball with delta R^2
    direct = saturation_constants(0.0625, 2.0, 2).bound
    assert ball_bound(1.0, 2.0, 2, 0.25) == pytest.approx(direct, rel=1e-14)


def test_shoot_matches_linear_closed_form_n3():
    # F(v) = v in dimension 3: v(r) = c sinh(r)/r
    prof = shoot(poly_profile({1: 1.0}), 1.0, 3, 1.0, 4001)
    r = prof.r[1:]
    exact = np.sinh(r) / r
    assert np.max(np.abs(prof.v[1:] - exact)) < 1e-10
    assert prof.v[0] == 1.0
    assert not prof.escaped


def test_shoot_input_validation():
    F = poly_profile({1: 1.0})
    with pytest.raises(RadialError):
        shoot(F, 1.0, 3, 1.0, 50)
    with pytest.raises(RadialError):
        shoot(F, np.inf, 3, 1.0, 200)
    with pytest.raises(RadialError):
        shoot(F, 1.0, 1, 1.0, 200)


def test_bvp_linear_closed_form_center_value():
    # v(0) = lam R / sinh(R) for F(v) = v, n = 3
    prof = solve_radial_bvp(poly_profile({1: 1.0}), 2.0, 3, 1.0, nodes=2001)
    assert prof.boundary_value == pytest.approx(2.0, rel=1e-9)
    assert prof.center_value == pytest.approx(2.0 / np.sinh(1.0), rel=1e-8)


def test_bvp_zero_data():
    prof = solve_radial_bvp(poly_profile({3: 1.0}), 0.0, 2, 1.0)
    assert np.all(prof.v == 0.0)


def test_bvp_bracket_error_on_decaying_profile():
    # F(v) = -c^2 v bends solutions down; v(R; c=lam) < lam breaks the bracket
    with pytest.raises(BracketError):
        solve_radial_bvp(poly_profile({1: -9.0}), 1.0, 2, 1.0, nodes=501)


def test_cubic_centers_saturate_below_bound():
    F = poly_profile({3: 1.0})
    rep = saturation_sweep(F, 1.0, 2.0, 2, [1.0, 10.0, 100.0, 1e3], nodes=1001)
    assert rep.growth_passed
    assert rep.monotone
    assert rep.bounded
    assert rep.centers[-1] < rep.constants.bound
    rows = rep.rows()
    assert len(rows) == 4 and rows[0][2] == rep.constants.bound


def test_sweep_rejects_bad_input():
    F = poly_profile({3: 1.0})
    with pytest.raises(RadialError):
        saturation_sweep(F, 1.0, 2.0, 2, [1.0, 0.5])
    with pytest.raises(RadialError):
        saturation_sweep(poly_profile({3: 0.0}), 1.0, 2.0, 2, [1.0, 2.0])


def test_energy_inequality_along_profile():
    # 0 <= v' <= sqrt(2 G(v)) holds up to discretization error
    F = poly_profile({3: 1.0})
    prof = solve_radial_bvp(F, 10.0, 2, 1.0, nodes=2001)
    assert energy_inequality_violation(F, prof) < 1e-3


def test_profile_as_nonlinearity():
    F = poly_profile({3: 2.0})
    a = F.as_nonlinearity()
    assert a.eval(0.0, 0.0, 2.0) == pytest.approx(16.0)
    assert F.g(2.0) == pytest.approx(8.0)
