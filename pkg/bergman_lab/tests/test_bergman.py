# coding: utf-8
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from bergman_lab import TrivialDomainError, adjugate, analyze_domain, deck_transformation, is_gamma_invariant
from bergman_lab.bergman import (HypothesisViolated, TruncationTooSmall, UnsupportedSet, bell_pullback_check,
                                 check_counterexample_hypotheses, counterexample_series, counterexample_set,
                                 counterexample_support, covering_map, det_phi_prime, fit_lower_bound_constant,
                                 leading_coefficient, lower_bound_box, polydisc_kernel, positive_kernel,
                                 project_polynomial, project_weighted_indicator, series_tail_bound)
from bergman_lab.measure import DomainError, set_volume
from bergman_lab.reinhardt import (RadialConstraint, ReinhardtAngularSet, box, domain_set, polydisc,
                                   sample_uniform, shell_region)

HARTOGS = [[1, -1], [0, 1]]
EXAMPLE_3D = [[1, 0, 0], [-1, 1, 0], [1, -1, 1]]
#: A = [[1, 1, 0], [0, 2, 0], [2, 0, 1]] covers its domain twice.
DOUBLE_COVER_A = [[1, 1, 0], [0, 2, 0], [2, 0, 1]]


@pytest.fixture(scope='module')
def example_3d():
    return analyze_domain(EXAMPLE_3D)


@pytest.fixture(scope='module')
def double_cover():
    return analyze_domain([list(row) for row in adjugate(DOUBLE_COVER_A)])


def test_polydisc_kernel():
    assert polydisc_kernel(np.zeros(2), np.zeros(2)) == pytest.approx(1 / math.pi ** 2)
    half = np.full(3, .5)
    assert polydisc_kernel(half, half) == pytest.approx((16 / (9 * math.pi)) ** 3)
    rng = np.random.default_rng(8)
    z, w = (.9 * rng.uniform(size=(2, 10, 2)) * np.exp(2j * np.pi * rng.uniform(size=(2, 10, 2))))
    assert np.allclose(polydisc_kernel(z, w), np.conj(polydisc_kernel(w, z)))
    assert np.allclose(positive_kernel(z, w), np.abs(polydisc_kernel(z, w)))


def test_covering_map(double_cover):
    assert double_cover.A == tuple(tuple(row) for row in DOUBLE_COVER_A)
    assert double_cover.degree == 2
    covering = covering_map(double_cover)
    z = np.array([.5, .4j, -.3])
    assert covering(z) == pytest.approx([.5 * .4j, (.4j) ** 2, .25 * -.3])
    assert det_phi_prime(covering_map(analyze_domain(EXAMPLE_3D)), np.full(3, .5)) == pytest.approx(.25)


@pytest.mark.parametrize('B', [HARTOGS, EXAMPLE_3D, [[2, -1], [0, 1]]])
def test_det_phi_prime_matches_finite_differences(B):
    covering = covering_map(analyze_domain(B))
    n = covering.dimension
    z = np.array([.4 + .2j, -.3 + .5j, .6j][:n])
    h = 1e-6
    jacobian = np.empty((n, n), dtype=complex)
    for k in range(n):
        step = np.zeros(n, dtype=complex)
        step[k] = h
        jacobian[:, k] = (covering(z + step) - covering(z - step)) / (2 * h)
    assert det_phi_prime(covering, z) == pytest.approx(np.linalg.det(jacobian), rel=1e-6)


def test_projection_of_radial_weights():
    # P(rho_{2 beta}) = prod 1 / (beta + 1) on the polydisc.
    series = project_weighted_indicator([2, 4], polydisc(2), 6)
    assert series.terms.keys() == {(0, 0)}
    assert series.coefficient((0, 0)) == pytest.approx(1 / 6)
    with pytest.raises(DomainError):
        project_weighted_indicator([-1, 0], polydisc(2), 4)


def test_antiholomorphic_monomials_are_annihilated():
    assert len(project_weighted_indicator([1, 0], polydisc(2), 8, phase=(-1, 0))) == 0
    assert len(project_weighted_indicator([0, 2], box([.5, 1]), 8, phase=(0, -2))) == 0


def test_projection_reproduces_polynomials():
    rng = np.random.default_rng(9)
    coefficients = {tuple(rng.integers(0, 5, 2)): complex(*rng.normal(size=2)) for _ in range(8)}
    series = project_polynomial(coefficients, polydisc(2), 6)
    assert series.nonzero().terms.keys() == {k for k, v in coefficients.items() if v != 0}
    for gamma, value in coefficients.items():
        assert series.coefficient(gamma) == pytest.approx(value, rel=1e-10)


def test_truncation_is_certified():
    region = shell_region(2, 1 / 16)
    with pytest.raises(TruncationTooSmall):
        project_weighted_indicator([1, 1], region, 4, phase=(1, 1), tolerance=1e-300)
    bound = series_tail_bound([1, 1], region, 4)
    series = project_weighted_indicator([1, 1], region, 4, phase=(1, 1), tolerance=2 * bound)
    assert len(series) == 1
    assert series_tail_bound([1, 1], region, 40) < bound


def test_tail_bound_controls_truncation(example_3d):
    b = (1, 1, 1)
    s = 1 / 16
    coarse = counterexample_series(example_3d, b, s, 6)
    fine = counterexample_series(example_3d, b, s, 12)
    F = counterexample_set(example_3d, b, s)
    bound = abs(example_3d.det_a) * series_tail_bound(example_3d.alpha_cover, F, 6, Fraction(1, 8))
    grid = lower_bound_box(example_3d, b).grid(3)
    difference = np.abs(fine(grid) - coarse(grid)).max()
    assert difference <= bound * (1 + 1e-9) + 1e-300


@pytest.mark.parametrize('k', [4, 6, 8, 10, 12])
def test_leading_coefficient(example_3d, k):
    s = 2. ** -k
    series = counterexample_series(example_3d, (1, 1, 1), s)
    a0 = series.coefficient((0, 0, 0))
    expected = 2 / (3 * math.pi) * s ** 3 * math.log(1 / s) * 1j
    assert a0 == pytest.approx(expected, rel=1e-9)
    assert leading_coefficient(example_3d, (1, 1, 1), s) == pytest.approx(expected, rel=1e-12)


def test_counterexample_terms(example_3d):
    series = counterexample_series(example_3d, (1, 1, 1), 1 / 16)
    ms = [-1, 0] + list(range(1, 48, 2))
    assert series.terms.keys() == {(1 + m, 1 + m, 0) for m in ms}
    assert all(value != 0 for value in series.terms.values())


def test_leading_coefficient_matches_monte_carlo(example_3d):
    s = 1 / 16
    F = counterexample_set(example_3d, (1, 1, 1), s)
    batch = sample_uniform(F, 200000, np.random.default_rng(10))
    values = batch.points[:, 0] * batch.points[:, 1]
    estimate = set_volume(F) * values.mean() / math.pi ** 3
    assert estimate == pytest.approx(leading_coefficient(example_3d, (1, 1, 1), s), rel=.02)


def test_counterexample_hypotheses(example_3d, double_cover):
    assert check_counterexample_hypotheses(example_3d, [1, 1, 1]) == (1, 1, 1)
    assert check_counterexample_hypotheses(double_cover, [1, 1, 2]) == (1, 1, 2)
    with pytest.raises(TrivialDomainError):
        check_counterexample_hypotheses(analyze_domain([[1, 0], [0, 1]]), [1, 1])
    with pytest.raises(HypothesisViolated):
        # m = 1 on the Hartogs triangle.
        check_counterexample_hypotheses(analyze_domain(HARTOGS), [1, 1])
    with pytest.raises(HypothesisViolated):
        check_counterexample_hypotheses(example_3d, [2, 1, 1])
    with pytest.raises(HypothesisViolated):
        check_counterexample_hypotheses(example_3d, [1, 1, 0])


def test_counterexample_support_is_gamma_invariant(double_cover):
    b = (1, 1, 1)
    s = 1 / 32
    series = counterexample_series(double_cover, b, s, 12)
    assert len(series) > 0
    assert all(is_gamma_invariant([g + 1 for g in gamma], double_cover) for gamma in series.terms)
    # The restriction to invariant indices drops nothing.
    F = counterexample_set(double_cover, b, s)
    unrestricted = project_weighted_indicator(double_cover.alpha_cover, F, 12, phase=double_cover.alpha_cover)
    assert (double_cover.det_a * unrestricted).terms.keys() == series.terms.keys()
    assert series.terms.keys() <= counterexample_support(double_cover, 12)


def test_counterexample_is_gamma_equivariant(double_cover):
    series = counterexample_series(double_cover, (1, 1, 1), 1 / 32, 12)
    rng = np.random.default_rng(11)
    z = .9 * rng.uniform(size=(20, 3)) * np.exp(2j * np.pi * rng.uniform(size=(20, 3)))
    ones_c = [sum(column, Fraction(0)) for column in zip(*double_cover.C)]
    for nu in itertools.product(range(2), repeat=3):
        character = np.exp(-2j * np.pi * float(sum(c * v for c, v in zip(ones_c, nu)) % 1))
        sigma = deck_transformation(double_cover, nu)
        assert np.allclose(series(sigma(z)), character * series(z), rtol=1e-10, atol=1e-300)


def test_lower_bound_box(example_3d, double_cover):
    assert lower_bound_box(example_3d, (1, 1, 1)).center == (0, 0, 0)
    pi_box = lower_bound_box(double_cover, (1, 1, 2))
    assert pi_box.center == (0, 0, .5)
    assert pi_box.volume == pytest.approx((math.pi / 64) ** 3)
    grid = pi_box.grid(5)
    assert grid.shape == (41 ** 3, 3)
    assert pi_box.member(grid).all()


def test_lower_bound_constant_persists(example_3d):
    b = (1, 1, 1)
    K, pi_box = fit_lower_bound_constant(example_3d, b, 2. ** -6)
    assert K == pytest.approx(2 / (3 * math.pi), rel=.02)
    grid = pi_box.grid(5)
    for k in (8, 10):
        s = 2. ** -k
        values = np.abs(counterexample_series(example_3d, b, s)(grid))
        assert values.min() >= K * s ** 3 * math.log(1 / s) * (1 - 1e-9)


@pytest.mark.parametrize('B, constant', [(HARTOGS, 1 / 16), ([[2, -1], [0, 1]], 1 / 8)])
def test_bell_pullback_check(B, constant):
    # E = {|w_2| < 1/2}; |E cap U| / |U| is 1/16 on the Hartogs triangle and 1/8 on {|w_1|^2 < |w_2| < 1}.
    analysis = analyze_domain(B)
    E = ReinhardtAngularSet(2, (RadialConstraint([0, 1], Fraction(1, 2)), ))
    covering = covering_map(analysis)
    rng = np.random.default_rng(12)
    for _ in range(5):
        z = rng.uniform(.1, .9, 2) * np.exp(2j * np.pi * rng.uniform(size=2))
        lhs, rhs = bell_pullback_check(analysis, E, z, 40)
        assert abs(lhs - rhs) <= 1e-6 * abs(lhs)
        assert lhs == pytest.approx(constant * det_phi_prime(covering, z), rel=1e-6)
        lhs, rhs = bell_pullback_check(analysis, domain_set(analysis), z, 40)
        expected = det_phi_prime(covering, z)
        assert lhs == pytest.approx(expected, rel=1e-6)
        assert rhs == pytest.approx(expected, rel=1e-6)


def test_bell_pullback_check_errors():
    analysis = analyze_domain(HARTOGS)
    with pytest.raises(UnsupportedSet):
        bell_pullback_check(analysis, ReinhardtAngularSet(2, (), (1, 0)), np.array([.5, .5]), 4)
    with pytest.raises(DomainError):
        bell_pullback_check(analysis, domain_set(analysis), np.array([1, .5]), 4)
