import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from sharpadams._numerics import radial_grid
from sharpadams.constants import omega_n
from sharpadams.rearrangement import GridFunction, RadialProfile, StepRearrangement
from sharpadams.verify import (InequalityReport, SUITES, bump_family, check_hardy, check_helmholtz_ms,
                               check_keyfull, check_keypropo, check_ms_inequality, check_odd_estimate,
                               check_radial_lemma, constant_stability, hardy_sides, max_drawdown,
                               maximal_weighted_integral, odd_coefficient, run_suite, sample_pairs)
from sharpadams.verify import _gradient_moment

steps = st.lists(st.tuples(st.floats(0.05, 3.0), st.floats(0.0, 5.0)), min_size=1, max_size=12).map(
    lambda xs: StepRearrangement.from_lengths([a for a, _ in xs], sorted((b for _, b in xs), reverse=True)))


def ones(n, R=1.0, N=4096):
    return RadialProfile(n, radial_grid(R, N), np.ones(N))


@pytest.mark.parametrize("a", [2 / 3, 1.0, 1.5])
def test_maximal_weighted_integral_against_quad(a):
    r = StepRearrangement.from_lengths([0.5, 1.0, 0.3, 2.0], [4.0, 2.5, 2.5, 0.5])
    for t1, t2 in [(1e-3, 0.4), (0.2, 3.0), (1.0, 9.0), (0.7, 0.7)]:
        want, _ = integrate.quad(lambda s: float(r.maximal(s)) * s ** (a - 1), t1, t2,
                                 points=[0.5, 1.5, 1.8, 3.8], epsabs=1e-13, epsrel=1e-13)
        assert maximal_weighted_integral(r, t1, t2, a) == pytest.approx(want, rel=1e-10, abs=1e-14)


def test_maximal_weighted_integral_vectorised_from_zero():
    r = StepRearrangement.from_lengths([2.0], [3.0])
    t = np.array([0.0, 1.0, 2.0, 8.0])
    got = maximal_weighted_integral(r, np.zeros_like(t), t, 0.5)
    # f** = 3 up to 2, then 6/s
    want = [0.0, 6.0, 6.0 * math.sqrt(2), 6.0 * math.sqrt(2) + 12.0 * (2 ** -0.5 - 8 ** -0.5)]
    np.testing.assert_allclose(got, want, rtol=1e-14)


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_hardy_single_step_closed_form(p):
    c, T = 2.0, 3.0
    lhs, rhs = hardy_sides(StepRearrangement([0.0, T], [c]), p)
    assert lhs == pytest.approx(c * T ** (1 / p) * (p / (p - 1)) ** (1 / p), rel=1e-12)
    assert rhs == pytest.approx(p / (p - 1) * c * T ** (1 / p), rel=1e-15)


def test_hardy_zero_function():
    rep = check_hardy([StepRearrangement([0.0, 1.0], [0.0])], 2.0)
    assert rep.passed and rep.min_slack == 0.0


@settings(max_examples=60, deadline=None)
@given(steps, st.sampled_from([1.2, 2.0, 3.5]))
def test_hardy_holds(r, p):
    lhs, rhs = hardy_sides(r, p)
    assert lhs <= rhs * (1 + 1e-12)
    assert check_hardy([r], p).passed


def test_hardy_rejects_p_one():
    with pytest.raises(ValueError):
        hardy_sides(StepRearrangement([0.0, 1.0], [1.0]), 1.0)


def test_sample_pairs():
    f = ones(3)
    pairs = sample_pairs(f, 100, np.random.default_rng(3))
    assert tuple(pairs[0]) == (1, f.radii.size - 1)
    assert np.all(pairs[:, 0] < pairs[:, 1])
    np.testing.assert_array_equal(pairs, sample_pairs(f, 100, np.random.default_rng(3)))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_ms_constant_source_is_sharp(n):
    f = ones(n)
    rep = check_ms_inequality(f, sample_pairs(f, 100, np.random.default_rng(0)))
    assert rep.passed
    assert abs(rep.min_slack) <= 1e-10 * rep.details["scale"]


@pytest.mark.parametrize("n", [2, 3, 4])
def test_ms_families_pass(n):
    rng = np.random.default_rng(n)
    for f in bump_family(n, 1.0, 10):
        pairs = sample_pairs(f, 100, rng)
        assert check_ms_inequality(f, pairs).passed
        assert check_helmholtz_ms(f, pairs).passed


def test_single_point_pair_has_zero_slack():
    f = bump_family(3, count=1)[0]
    rep = check_ms_inequality(f, np.array([[500, 500]]))
    assert rep.min_slack == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("n", [3, 4, 6])
def test_first_order_constant_vanishes(n):
    # at k = 1 the estimate is an identity for radial decreasing sources
    rng = np.random.default_rng(11)
    for f in bump_family(n, 1.0, 4) + [ones(n)]:
        pairs = sample_pairs(f, 100, rng)
        rep = check_keypropo(f, 1, pairs)
        ms = check_ms_inequality(f, pairs)
        assert rep.empirical_constant * rep.details["f_norm"] <= 1e-12 * ms.details["scale"]
        assert rep.min_slack == pytest.approx(ms.min_slack, abs=1e-10 * ms.details["scale"])


def test_max_drawdown():
    assert max_drawdown([]) == 0.0
    assert max_drawdown([1, 2, 3]) == 0.0
    assert max_drawdown([3, 1, 4, 0.5, 2]) == 3.5


def test_constant_report_invariant_under_dilation():
    consts = []
    for R in (1.0, 2.0, 4.0):
        f = bump_family(6, R, 2, dilate_order=4)[1]
        consts.append(check_keypropo(f, 2, sample_pairs(f, 20, np.random.default_rng(0))).empirical_constant)
    np.testing.assert_allclose(consts, consts[0], rtol=1e-10)


def test_keyfull_requires_subcritical_order():
    f = ones(4)
    with pytest.raises(ValueError):
        check_keyfull(f, 2, np.array([[1, 10]]))
    with pytest.raises(ValueError):
        check_odd_estimate(ones(3), 1, np.array([[1, 10]]))


def test_odd_coefficient():
    assert odd_coefficient(4, 1) == pytest.approx(16 / 4)
    assert odd_coefficient(6, 1) == pytest.approx(36 / 8)


@pytest.mark.parametrize("k", [1, 2])
def test_gradient_moment_linear_rearrangement(k):
    # f = a (1 - (rho/R)^n) has f*(t) = a (1 - t/|B_R|), so (-f*)' = a/|B_R|
    n, R, a = 5, 1.5, 2.0
    r = radial_grid(R, 4096)
    f = RadialProfile(n, r, a * (1 - (r / R) ** n))
    om = omega_n(n)
    i1 = np.array([0, 10, 500, 2000])
    i2 = np.array([4095, 100, 3000, 4095])
    t1, t2 = om * r[i1] ** n, om * r[i2] ** n
    e = 2 * k / n + 1
    exact = a / (om * R ** n) * (t2 ** e - t1 ** e) / e / om ** (2 * k / n)
    got = _gradient_moment(f, r[i1], r[i2], k)
    np.testing.assert_allclose(got, exact, rtol=1e-9, atol=1e-10 * exact[0])


def test_odd_estimate_rescales_to_budget():
    f = bump_family(6, 1.0, 2)[0]
    big = f.with_values(50 * f.values)
    pairs = sample_pairs(f, 50, np.random.default_rng(2))
    rep = check_odd_estimate(big, 1, pairs)
    assert rep.passed and rep.details["gradient_budget"] == 1.0
    assert rep.min_slack >= 0
    again = check_odd_estimate(big.with_values(2 * big.values), 1, pairs)
    assert again.empirical_constant == pytest.approx(rep.empirical_constant, rel=1e-10)


def test_radial_lemma_characteristic_function():
    n, p, a = 3, 2.0, 1.7
    g = GridFunction([a], [1.0])
    r_edge = (a / omega_n(n)) ** (1 / n)
    inside = (a * (1 - 1e-9) / omega_n(n)) ** (1 / n)
    rep = check_radial_lemma(g, p, [inside], n)
    assert rep.passed
    assert rep.min_slack == pytest.approx((1 - 1e-9) ** (-1 / p) - 1, rel=1e-4)
    assert check_radial_lemma(g, p, [r_edge * 2], n).passed


def test_radial_lemma_zero_and_validation():
    g = GridFunction([1.0, 2.0], [0.0, 0.0])
    rep = check_radial_lemma(g, 1.0, [0.1, 1.0], 4)
    assert rep.passed and rep.min_slack == 0.0
    with pytest.raises(ValueError):
        check_radial_lemma(g, 0.5, [1.0], 4)
    with pytest.raises(ValueError):
        check_radial_lemma(g, 2.0, [0.0], 4)


def test_report_as_dict_types():
    rep = InequalityReport("x", 3, np.float64(0.5), None, np.bool_(True))
    d = rep.as_dict()
    assert d["pass"] is True and isinstance(d["min_slack"], float)
    assert set(d) == {"name", "cases", "min_slack", "empirical_constant", "pass", "tolerance", "details"}


def test_bump_family_shapes():
    fam = bump_family(4, 2.0, 6, n_nodes=512)
    assert len(fam) == 6
    for f in fam:
        assert f.R == 2.0 and np.all(np.diff(f.values) <= 0) and np.all(f.values >= 0)


def test_constant_stability_keyfull():
    rep = constant_stability(check_keyfull, 6, 2, n_nodes=1024, shapes=2)
    assert rep.passed
    assert rep.details["max_drift"] <= 0.10


@pytest.mark.parametrize("suite", SUITES)
def test_every_suite_passes(suite):
    reps = run_suite(suite, seed=7, n_nodes=1024)
    assert reps and all(r.passed for r in reps)


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("nope")
