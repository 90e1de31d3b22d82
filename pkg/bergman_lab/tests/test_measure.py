# coding: utf-8
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from bergman_lab import analyze_domain
from bergman_lab.measure import (DomainError, RangeError, ZeroDirection, angular_character_integral,
                                 concentration_exponent, dominant_index, fit_sublevel_exponents,
                                 monomial_l2_norm_sq, polydisc_critical_exponent, radial_moment, region_integral_As,
                                 rho, set_volume, sublevel_volume, top_multiplicity, weighted_set_integral)
from bergman_lab.reinhardt import box, domain_set, polydisc, shell_region


def test_rho():
    z = np.array([.5, -.25j, 0])
    assert rho([1, 2, 0], z) == pytest.approx(.5 * .0625)
    assert rho([0, 0, 0], z) == 1
    assert rho([Fraction(1, 2), 0, 0], z) == pytest.approx(math.sqrt(.5))
    assert rho([1, 1, 1], np.array([[.5, .5, .5], [1, .5, .2]])).tolist() == pytest.approx([.125, .1])
    with pytest.raises(DomainError):
        rho([0, 0, -1], z)


def test_weight_exponents():
    assert polydisc_critical_exponent([1, 1, 0]) == Fraction(4, 3)
    assert polydisc_critical_exponent([2, 1]) == Fraction(3, 2)
    assert concentration_exponent([1, 1], 2) == Fraction(4, 3)
    assert top_multiplicity([1, 1, 0]) == 2
    with pytest.raises(RangeError):
        concentration_exponent([1, 1], 1)
    with pytest.raises(DomainError):
        polydisc_critical_exponent([0, 0])


@pytest.mark.parametrize('s', [2. ** -k for k in (2, 6, 10, 16)])
def test_sublevel_volume_closed_forms(s):
    L = math.log(1 / s)
    assert sublevel_volume([1, 1], s) == pytest.approx(math.pi ** 2 * s ** 2 * (1 + 2 * L), rel=1e-7)
    assert sublevel_volume([2, 1], s) == pytest.approx(2 * math.pi ** 2 * s * (1 - s / 2), rel=1e-7)
    assert sublevel_volume([1, 0], s) == pytest.approx(math.pi ** 2 * s ** 2, rel=1e-12)
    expected = math.pi ** 3 * (s ** (2 / 3) * (L + .75) + s ** 2 / 4)
    assert sublevel_volume([3, 3, 1], s) == pytest.approx(expected, rel=1e-6)


def test_sublevel_volume_errors():
    assert sublevel_volume([1, 1], 1) == pytest.approx(math.pi ** 2)
    with pytest.raises(RangeError):
        sublevel_volume([1, 1], 0)
    with pytest.raises(DomainError):
        sublevel_volume([1, -1], .5)


def _sublevel_cases(count, seed):
    rng = np.random.default_rng(seed)
    cases = []
    while len(cases) < count:
        alpha = rng.integers(0, 4, rng.integers(2, 4)).tolist()
        if any(alpha):
            cases.append((alpha, float(rng.uniform(.05, .8)), int(rng.integers(2 ** 32))))
    return cases


@pytest.mark.parametrize('alpha, s, seed', _sublevel_cases(50, 20))
def test_sublevel_volume_matches_monte_carlo(alpha, s, seed):
    rng = np.random.default_rng(seed)
    n, size = len(alpha), 200000
    radii = np.sqrt(rng.uniform(size=(size, n)))
    q = (np.prod(radii ** np.array(alpha), axis=1) < s).mean()
    estimate = math.pi ** n * q
    se = math.pi ** n * math.sqrt(q * (1 - q) / size)
    assert abs(sublevel_volume(alpha, s) - estimate) <= 4 * se + 1e-12


@given(st.lists(st.integers(0, 4), min_size=2, max_size=3).filter(any), st.floats(1e-6, 1.), st.floats(0., 1.))
@settings(max_examples=50, deadline=None)
def test_sublevel_volume_is_nondecreasing(alpha, s, fraction):
    smaller = max(s * fraction, 1e-12)
    assert sublevel_volume(alpha, smaller) <= sublevel_volume(alpha, s) * (1 + 1e-7)


@pytest.mark.parametrize('alpha, power, log_power', [([1, 1], 2, 1), ([2, 1], 1, 0), ([1, 1, 0], 2, 1),
                                                    ([3, 3, 1], 2 / 3, 1)])
def test_sublevel_exponent_fit(alpha, power, log_power):
    fit = fit_sublevel_exponents(alpha, [2. ** -k for k in range(8, 21)])
    assert fit['s_exponent'] == pytest.approx(power, rel=.02)
    assert abs(fit['log_exponent'] - log_power) < .1
    assert fit['expected_s_exponent'] == pytest.approx(power)


@given(st.lists(st.integers(0, 6), min_size=2, max_size=3), st.integers(3, 12))
@settings(max_examples=25, deadline=None)
def test_shell_integral_matches_quadrature(d, k):
    s = 2. ** -k
    d1, d2 = d[0], d[1]
    value, _ = integrate.dblquad(lambda r2, r1: r1 ** d1 * r2 ** d2, s, math.sqrt(s), 0, lambda r1: s / r1,
                                 epsabs=0, epsrel=1e-11)
    expected = value / math.prod(v + 1 for v in d[2:])
    assert region_integral_As(d, s) == pytest.approx(expected, rel=1e-8)


def test_shell_integral_branches():
    s = 1 / 64
    assert region_integral_As([2, 2], s) == pytest.approx(s ** 3 * math.log(64) / 6)
    # Rational exponents select the logarithmic branch exactly.
    assert region_integral_As([Fraction(1, 3), Fraction(1, 3)], s) == pytest.approx(
        s ** Fraction(4, 3) * math.log(64) / (2 * Fraction(4, 3)))
    with pytest.raises(RangeError):
        region_integral_As([1, 1], .25)
    with pytest.raises(DomainError):
        region_integral_As([-1, 1], .1)


@given(st.floats(.01, 6.), st.integers(3, 12), st.lists(st.integers(0, 3), max_size=1))
@settings(max_examples=40, deadline=None)
def test_shell_integral_is_continuous_across_the_branch(d2, k, rest):
    s = 2. ** -k
    on_branch = region_integral_As([d2, d2] + rest, s)
    for delta in (1e-6, -1e-6):
        assert region_integral_As([d2 + delta, d2] + rest, s) == pytest.approx(on_branch, rel=1e-4)


def test_shell_moment_uses_closed_form():
    s = 1 / 32
    assert radial_moment(shell_region(3, s), [2, 2, 1]) == pytest.approx(region_integral_As([2, 2, 1], s))
    assert set_volume(shell_region(2, s)) == pytest.approx(math.pi ** 2 * s ** 2 * math.log(1 / s), rel=1e-12)


def test_angular_character_integral():
    full = (2 * math.pi) ** 3
    kappa0 = (1, 1, 0)
    assert angular_character_integral((0, 0, 0), kappa0) == pytest.approx(full / 2)
    assert angular_character_integral((-1, -1, 0), kappa0) == pytest.approx(full * -1j / math.pi)
    assert angular_character_integral((3, 3, 0), kappa0) == pytest.approx(full * 1j / (3 * math.pi))
    assert angular_character_integral((2, 2, 0), kappa0) == 0
    assert angular_character_integral((1, 0, 0), kappa0) == 0
    with pytest.raises(ZeroDirection):
        angular_character_integral((1, 0, 0), (0, 0, 0))


def test_angular_character_integral_on_the_torus():
    rng = np.random.default_rng(6)
    theta = 2 * np.pi * rng.uniform(size=(200000, 2))
    kappa0 = np.array([1, 2])
    for kappa in [(0, 0), (-1, -2), (1, 2), (1, 0)]:
        values = (np.sin(theta @ kappa0) >= 0) * np.exp(1j * theta @ np.array(kappa))
        estimate = (2 * np.pi) ** 2 * values.mean()
        se = (2 * np.pi) ** 2 * values.std() / math.sqrt(len(values))
        assert abs(estimate - angular_character_integral(kappa, kappa0)) < 5 * se + 1e-9


@given(st.integers(2, 3).flatmap(lambda n: st.tuples(st.lists(st.integers(-6, 6), min_size=n, max_size=n),
                                                     st.lists(st.integers(-3, 3), min_size=n, max_size=n)
                                                     .filter(any))))
@settings(max_examples=100, deadline=None)
def test_angular_character_integral_is_conjugate_symmetric(vectors):
    kappa, kappa0 = vectors
    value = angular_character_integral(kappa, kappa0)
    mirrored = angular_character_integral([-v for v in kappa], kappa0)
    assert mirrored == pytest.approx(np.conj(value), abs=1e-9)


def test_monomial_norms():
    assert monomial_l2_norm_sq((0, 0)) == pytest.approx(math.pi ** 2)
    assert monomial_l2_norm_sq((1, 2)) == pytest.approx(math.pi ** 2 / 6)
    with pytest.raises(DomainError):
        monomial_l2_norm_sq((-1, 0))


def test_set_volumes():
    assert set_volume(polydisc(3)) == pytest.approx(math.pi ** 3)
    assert set_volume(box([.5, .25])) == pytest.approx(math.pi ** 2 / 64)
    assert set_volume(domain_set(analyze_domain([[1, -1], [0, 1]]))) == pytest.approx(math.pi ** 2 / 2, rel=1e-8)


def test_weighted_set_integral_with_log_weight():
    # int_{D^2} -log(|z_1|^2 |z_2|^2) dV = 2 pi^2
    value = weighted_set_integral(polydisc(2), [0, 0], [2, 2], 1)
    assert value == pytest.approx(2 * math.pi ** 2, rel=1e-7)
    assert weighted_set_integral(polydisc(2), [2, 0]) == pytest.approx(math.pi ** 2 / 2)


def test_dominant_index():
    j_star, constant = dominant_index(.5, 0, range(1, 11))
    assert j_star == 1
    assert constant == pytest.approx(2 * (1 - 2. ** -10))
    # Without the polynomial factor the first index dominates, including j = 0.
    assert dominant_index(.5, 0, range(0, 11)) == (0, pytest.approx(2 * (1 - 2. ** -11)))
    indices = range(1, 60)
    j_star, constant = dominant_index(.9, 2, indices)
    terms = {j: j ** 2 * .9 ** j for j in indices}
    assert j_star == max(terms, key=terms.get)
    assert constant == pytest.approx(sum(terms.values()) / terms[j_star])
    with pytest.raises(RangeError):
        dominant_index(1, 1, indices)


def test_dominant_index_constant_is_uniform():
    rng = np.random.default_rng(21)
    constants = []
    for _ in range(500):
        ratio = float(rng.uniform(.05, .9))
        mu = int(rng.integers(0, 5))
        indices = np.flatnonzero(rng.uniform(size=201) < rng.uniform(.01, 1)).tolist() or [int(rng.integers(201))]
        j_star, constant = dominant_index(ratio, mu, indices)
        terms = {j: float(j) ** mu * ratio ** j for j in indices}
        assert j_star in terms
        assert terms[j_star] == pytest.approx(max(terms.values()), rel=1e-12)
        assert constant == pytest.approx(sum(terms.values()) / terms[j_star])
        constants.append(constant)
    assert 1 <= max(constants) < 1e3
