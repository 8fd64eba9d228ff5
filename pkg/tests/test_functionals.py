import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sharpadams.constants import SobolevParams, beta_nm, omega_n
from sharpadams.extremals import normalized_sequence
from sharpadams.functionals import (OVERFLOW_LOG, adams_functional_ball, adams_functional_space,
                                    fit_subcritical_growth, log_phi_nm, phi_nm, rearranged_functional,
                                    subcritical_ratio)
from sharpadams.radial_solver import grad_m_norm
from sharpadams.rearrangement import (GridFunction, RadialProfile, StepRearrangement, decreasing_rearrangement,
                                      radial_grid, spherical_rearrangement)

P42, P31, P21 = SobolevParams(4, 2), SobolevParams(3, 1), SobolevParams(2, 1)


def mp_phi(p, t):
    """Truncated exponential by direct high-precision subtraction."""
    mpmath.mp.dps = 300
    a = -(-p.n // p.m) - 1
    t = mpmath.mpf(t)
    return float(mpmath.exp(t) - sum(t ** j / mpmath.factorial(j) for j in range(a)))


def test_phi_closed_forms():
    t = np.array([1e-3, 0.3, 1.0, 5.0])
    np.testing.assert_allclose(phi_nm(P42, t), np.expm1(t), rtol=1e-14)
    np.testing.assert_allclose(phi_nm(P31, t), np.expm1(t) - t, rtol=1e-12)
    assert phi_nm(P42, 0.0) == 0.0 and phi_nm(P31, 0.0) == 0.0
    # Phi'(0) = 0 for (3,1): Phi(h)/h -> 0
    assert phi_nm(P31, 1e-8) / 1e-8 < 1e-7


def test_phi_large_argument():
    assert phi_nm(SobolevParams(9, 1), 60.0) / math.exp(60.0) == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("nm", [(2, 1), (3, 1), (5, 2), (7, 1), (9, 2)])
@pytest.mark.parametrize("t", [1e-12, 1e-5, 0.01, 0.49, 0.51, 2.0, 30.0])
def test_phi_against_high_precision(nm, t):
    p = SobolevParams(*nm)
    assert phi_nm(p, t) == pytest.approx(mp_phi(p, t), rel=1e-12)


def test_log_phi_consistent():
    p = SobolevParams(7, 2)
    t = np.geomspace(1e-6, 500, 50)
    np.testing.assert_allclose(log_phi_nm(p, t), np.log(phi_nm(p, t)), rtol=1e-12)
    assert np.isfinite(log_phi_nm(p, 5000.0))


@given(st.integers(2, 10).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n - 1))))
def test_phi_nonnegative_increasing_convex(nm):
    p = SobolevParams(*nm)
    t = np.linspace(0, 20, 2001)
    v = phi_nm(p, t)
    assert np.all(v >= 0)
    assert np.all(np.diff(v) >= 0)
    assert np.all(np.diff(v, 2) >= -1e-12 * v[2:])


def test_ball_functional_of_zero():
    r = radial_grid(1.0, 512)
    rep = adams_functional_ball(RadialProfile(4, r, np.zeros_like(r)), P42)
    assert rep.value == pytest.approx(1.0, rel=1e-12) and rep.normalized and not rep.truncated


def test_ball_functional_of_constant():
    n, R, c, mult = 4, 0.7, 0.05, 1.3
    r = radial_grid(R, 512)
    rep = adams_functional_ball(RadialProfile(n, r, np.full_like(r, c)), P42, mult, normalize=False)
    T = omega_n(n) * R ** n
    assert rep.value == pytest.approx(T * math.exp(mult * beta_nm(P42) * c ** 2), rel=1e-12)


def test_ball_functional_rejects_bad_input():
    r = radial_grid(1.0, 512)
    u = RadialProfile(3, r, np.zeros_like(r))
    with pytest.raises(ValueError):
        adams_functional_ball(u, P42)
    with pytest.raises(ValueError):
        adams_functional_ball(u, P31, mult=0.0)


def test_moser_sequence_bounded_at_sharp_constant():
    logs = []
    for j in [4, 16, 64, 256, 1024, 4096]:
        u, _ = normalized_sequence(P21, j, 0.0)
        logs.append(adams_functional_ball(u, P21, 1.0).log_value)
    # the increments shrink and the whole sweep stays within a bounded band
    assert max(logs) - min(logs) < 0.1
    assert np.all(np.diff(np.diff(logs)) < 0)


UNIT_FAMILY_CAP = 2.0


@pytest.mark.parametrize("nm", [(2, 1), (3, 1), (4, 2), (6, 3)])
def test_unit_gradient_family_below_cap(nm):
    p = SobolevParams(*nm)
    logs = []
    for j in [4, 64, 1024, 4096]:
        u, _ = normalized_sequence(p, j, 0.0)
        logs.append(adams_functional_ball(u, p, 1.0).log_value)
    r = radial_grid(1.0, 4096)
    for w in [0.1, 0.3, 0.6, 1.0]:
        b = RadialProfile(p.n, r, np.clip(1 - (r / w) ** 2, 0, None) ** (p.m + 2))
        b = b.with_values(b.values / grad_m_norm(b, p))
        assert grad_m_norm(b, p) <= 1 + 1e-12
        logs.append(adams_functional_ball(b, p, 1.0).log_value)
    assert max(logs) < UNIT_FAMILY_CAP


def test_overflow_flag_matches_nodal_log_integrand():
    r = radial_grid(1.0, 512)
    c = beta_nm(P42)
    for peak in (699.0, 701.0):
        height = math.sqrt(peak / c)
        u = RadialProfile(4, r, height * (1 - r ** 2))
        rep = adams_functional_ball(u, P42)
        assert rep.overflow == (peak > OVERFLOW_LOG)
        assert math.isfinite(rep.log_value)


def test_space_functional_examples():
    r = radial_grid(2.0, 1024)
    zero = adams_functional_space(RadialProfile(3, r, np.zeros_like(r)), P31)
    assert zero.value == 0.0 and zero.truncated
    bump = RadialProfile(3, r, np.clip(1 - r ** 2, 0, None) ** 3)
    assert adams_functional_space(bump, P31).tail == 0.0


def test_space_functional_tail_envelope():
    r = radial_grid(1.0, 1024)
    u = RadialProfile(2, r, np.exp(-r ** 2))
    inner = adams_functional_space(u, P21)
    mass_inside = float(np.pi * (1 - np.exp(-2)) / 2)
    whole = adams_functional_space(u, P21, lp_mass=np.pi / 2)
    assert whole.tail > 0
    assert whole.value == pytest.approx(inner.value + whole.tail)
    # the envelope bound dominates the true outside contribution
    rr = np.linspace(1, 12, 20001)
    true_tail = np.trapezoid(phi_nm(P21, beta_nm(P21) * np.exp(-2 * rr ** 2)) * 2 * np.pi * rr, rr)
    assert whole.tail >= true_tail
    assert mass_inside < np.pi / 2


def test_subcritical_constant_growth():
    mults = [0.5, 0.7, 0.8, 0.9, 0.95]
    consts = []
    r = radial_grid(8.0, 4096)
    shapes = [np.clip(1 - (r / w) ** 2, 0, None) ** k for w in (2.0, 4.0, 7.0) for k in (2, 3, 6)]
    for mult in mults:
        ratios = []
        for s in shapes:
            u = RadialProfile(2, r, s)
            ratios.append(subcritical_ratio(u, P21, mult, grad_m_norm(u, P21)))
        consts.append(max(ratios))
    assert np.all(np.isfinite(consts)) and np.all(np.diff(consts) > 0)
    _, b = fit_subcritical_growth(mults, consts)
    assert 0 < b <= 1.0
    with pytest.raises(ValueError):
        subcritical_ratio(RadialProfile(2, r, shapes[0]), P21, 1.0, 1.0)


def test_subcritical_ratio_dilation_invariant_in_the_plane():
    r = radial_grid(8.0, 4096)
    vals = []
    for lam in (0.5, 1.0, 2.0):
        u = RadialProfile(2, r, np.clip(1 - (r * lam / 4) ** 2, 0, None) ** 3)
        vals.append(subcritical_ratio(u, P21, 0.8, grad_m_norm(u, P21)))
    np.testing.assert_allclose(vals, vals[0], rtol=1e-6)


def test_rearranged_functional_examples():
    c, T, mult = 0.2, 2.5, 1.1
    step = StepRearrangement([0.0, T], [c])
    assert rearranged_functional(step, P21, mult) == pytest.approx(T * math.exp(mult * beta_nm(P21) * c ** 2),
                                                                   rel=1e-14)
    assert rearranged_functional(step, P21, 1.0) < rearranged_functional(step, P21, 1.5)
    with pytest.raises(ValueError):
        rearranged_functional(step, P21, 1.0, T=3.0)


def test_rearrangement_invariance():
    rng = np.random.default_rng(4)
    for _ in range(20):
        g = GridFunction(rng.uniform(0.01, 1.0, 30), rng.normal(scale=0.3, size=30))
        star = decreasing_rearrangement(g)
        prof = spherical_rearrangement(g, 4)
        a = adams_functional_ball(prof, P42, 1.2, normalize=False).value
        b = rearranged_functional(star, P42, 1.2)
        assert a == pytest.approx(b, rel=1e-8)


def test_rearranged_matches_smooth_profile_shells():
    r = radial_grid(1.0, 2048)
    u = RadialProfile(2, r, 0.5 * (1 - r ** 2))
    prof = spherical_rearrangement(u)
    lhs = adams_functional_ball(prof, P21, 1.0, normalize=False).value
    rhs = rearranged_functional(decreasing_rearrangement(u), P21, 1.0)
    assert lhs == pytest.approx(rhs, rel=1e-8)
