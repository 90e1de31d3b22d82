# coding: utf-8
import math

import numpy as np
import pytest

from bergman_lab import analyze_domain
from bergman_lab.bergman import S0, HypothesisViolated, counterexample_series
from bergman_lab.blowup import (StratumWarning, blowup_denominator, blowup_experiment, lambda_s,
                                superlevel_measure, validate_s_grid)
from bergman_lab.estimator import task_rng
from bergman_lab.measure import RangeError
from bergman_lab.series import MonomialSeries

EXAMPLE_3D = [[1, 0, 0], [-1, 1, 0], [1, -1, 1]]


@pytest.fixture(scope='module')
def example_3d():
    return analyze_domain(EXAMPLE_3D)


def test_validate_s_grid():
    assert validate_s_grid([1 / 16, 1 / 64]) == [1 / 16, 1 / 64]
    # The grid may start at s0 itself but not above it.
    assert validate_s_grid([S0]) == [1 / 16]
    for grid in ([], [1 / 8], [float(S0) * (1 + 1e-12)], [1 / 64, 1 / 16], [1 / 16, 1 / 16], [0.]):
        with pytest.raises(RangeError):
            validate_s_grid(grid)


def test_lambda_s(example_3d):
    s = 2. ** -8
    assert lambda_s(example_3d, (1, 1, 1), s, 2.) == pytest.approx(2 * s ** 3 * math.log(1 / s))


@pytest.mark.parametrize('k', [4, 8, 12])
def test_denominator_closed_form(example_3d, k):
    s = 2. ** -k
    expected = (2 * math.pi) ** 3 / 2 * s ** 4 * math.log(1 / s) / 16
    assert blowup_denominator(example_3d, (1, 1, 1), s) == pytest.approx(expected, rel=1e-12)


def test_superlevel_measure_of_simple_series():
    # |1| > 0 * rho everywhere; |0| > 1 * rho nowhere.
    one = MonomialSeries({(0, 0): 1}, 0, 2)
    full = superlevel_measure(one, (1, 1), 1 / 16, 0., 4000, task_rng(0))
    assert full.value == pytest.approx(math.pi ** 2)
    assert full.standard_error == 0
    empty = superlevel_measure(MonomialSeries({}, 0, 2), (1, 1), 1 / 16, 1., 4000, task_rng(0))
    assert empty.value == 0
    # |z_1 z_2| > rho_{(1, 1)} / 2 everywhere but |rho| > 2 rho nowhere.
    product = MonomialSeries({(1, 1): 1}, 1, 2)
    assert superlevel_measure(product, (1, 1), 1 / 16, .5, 4000, task_rng(0)).value == pytest.approx(math.pi ** 2)
    assert superlevel_measure(product, (1, 1), 1 / 16, 2., 4000, task_rng(0)).value == 0


def test_superlevel_measure_matches_the_volume_of_a_disc():
    # |1| > rho_{(1, 0)} / r  iff  |z_1| < r
    one = MonomialSeries({(0, 0): 1}, 0, 2)
    result = superlevel_measure(one, (1, 0), 1 / 16, 1 / .3, 40000, task_rng(1))
    expected = math.pi ** 2 * .09
    assert abs(result.value - expected) < 4 * result.standard_error


def test_superlevel_measure_warns_on_an_undersampled_stratum():
    # 1 > 4 |z_1| exactly on the innermost stratum |z_1| < 1/4, which gets the two-sample floor.
    one = MonomialSeries({(0, 0): 1}, 0, 2)
    with pytest.warns(StratumWarning):
        result = superlevel_measure(one, (1, 0), 1 / 4, 4., 20, task_rng(2))
    assert result.value == pytest.approx(math.pi ** 2 / 16)


def test_blowup_grows_like_a_power_of_log(example_3d):
    s_grid = [2. ** -k for k in (4, 8, 12)]
    result = blowup_experiment(example_3d, (1, 1, 1), s_grid, samples=20000, seed=3)
    assert result.expected_slope == pytest.approx(1 / 3)
    assert result.K > 0
    ratios = [row.ratio for row in result.rows]
    assert ratios == sorted(ratios)
    assert abs(result.slope - result.expected_slope) < .15
    for row in result.rows:
        assert row.superlevel_measure.value >= result.box.volume
    lines = result.report().to_csv().splitlines()
    assert lines[0].startswith('# blowup')
    assert lines[-1].startswith('FIT,')
    assert len(lines) == 2 + 1 + len(s_grid) + 1


def test_blowup_is_reproducible(example_3d):
    s_grid = [2. ** -k for k in (4, 6)]
    first = blowup_experiment(example_3d, (1, 1, 1), s_grid, truncation_degree=12, samples=2000, seed=4)
    second = blowup_experiment(example_3d, (1, 1, 1), s_grid, truncation_degree=12, samples=2000, seed=4,
                               workers=2)
    assert first.report().to_csv() == second.report().to_csv()


def test_log_weighted_denominator_lowers_the_slope(example_3d):
    s_grid = [2. ** -k for k in (4, 8, 12)]
    result = blowup_experiment(example_3d, (1, 1, 1), s_grid, samples=20000, seed=5, log_power=1)
    assert result.expected_slope == pytest.approx(1 / 3 - 1)
    assert abs(result.slope - result.expected_slope) < .15


def test_blowup_hypotheses():
    with pytest.raises(HypothesisViolated):
        blowup_experiment(analyze_domain([[1, -1], [0, 1]]), (1, 1), [1 / 16])


@pytest.mark.slow
def test_blowup_on_the_full_grid(example_3d):
    s_grid = [2. ** -k for k in range(4, 17)]
    result = blowup_experiment(example_3d, (1, 1, 1), s_grid, samples=10 ** 6, seed=20240101)
    assert abs(result.slope - 1 / 3) < .15
    assert result.rows[-1].ratio / result.rows[0].ratio >= 1.5
    series = counterexample_series(example_3d, (1, 1, 1), s_grid[-1])
    grid = result.box.grid(3)
    assert np.abs(series(grid)).min() >= result.rows[-1].lambda_s * (1 - 1e-9)
