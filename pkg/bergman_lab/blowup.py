# coding: utf-8
"""
Growth of the weak-type ratio

    lambda_s^{p*} mu{|h_s| / rho_alpha > lambda_s} / int_{F_s} rho_{2 alpha} dV

as ``s -> 0``, where ``h_s`` is the projection of ``det phi' 1_{F_s}``.
"""
import logging
import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .bergman import (DEFAULT_BOX_RADIUS, DEFAULT_TRUNCATION, S0, LowerBoundBox, check_counterexample_hypotheses,
                      counterexample_series, counterexample_set, fit_lower_bound_constant)
from .core import DomainAnalysis
from .estimator import EstimateResult, ExperimentReport, NonConvergent, _run_tasks, task_rng
from .measure import RangeError, rho, weighted_set_integral
from .series import MonomialSeries

logger = logging.getLogger(__name__)

#: Sampling density of the strata ``[0, s)``, ``[s, sqrt(s))`` and ``[sqrt(s), 1)`` of ``|z_1|``.
STRATUM_WEIGHTS = (1, 4, 1)
#: The superlevel measure at the smallest ``s`` must satisfy ``2 SE <= MAX_RELATIVE_CI * value``.
MAX_RELATIVE_CI = .3
#: Largest share of the estimate a stratum held at the two-sample floor may carry.
MAX_FLOOR_SHARE = .1


class StratumWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class BlowupRow:
    s: float
    lambda_s: float
    superlevel_measure: EstimateResult
    denominator: float
    ratio: float


@dataclass(frozen=True)
class BlowupResult:
    rows: Tuple[BlowupRow, ...]
    slope: float
    expected_slope: float
    K: float
    fit_s: float
    box: LowerBoundBox
    comment: str = ''

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([{'s': row.s, 'log_inv_s': math.log(1 / row.s), 'lambda_s': row.lambda_s,
                              'superlevel_measure': row.superlevel_measure.value,
                              'superlevel_se': row.superlevel_measure.standard_error,
                              'denominator': row.denominator, 'ratio': row.ratio} for row in self.rows],
                            columns=['s', 'log_inv_s', 'lambda_s', 'superlevel_measure', 'superlevel_se',
                                     'denominator', 'ratio'])

    def report(self) -> ExperimentReport:
        fit = {'slope': self.slope, 'expected_slope': self.expected_slope, 'K': self.K, 'fit_s': self.fit_s}
        return ExperimentReport(self.to_frame(), fit, self.comment)


def validate_s_grid(s_grid: Sequence[float]) -> List[float]:
    """
    ``s_grid`` must be nonempty, strictly decreasing and inside ``(0, s0]``.

    ``s0`` itself is admitted: ``K`` is fitted at the largest ``s`` of the
    grid and the lower bound is only asserted at that ``s`` and below, so the
    dyadic grid ``2^-4, ..., 2^-16`` may start at ``s0 = 2^-4``.
    """
    s_grid = [float(s) for s in s_grid]
    if not s_grid:
        raise RangeError('The s grid is empty.')
    if any(not 0 < s <= S0 for s in s_grid):
        raise RangeError(f'Every s must lie in (0, {S0}], got {s_grid}.')
    if any(later >= earlier for earlier, later in zip(s_grid, s_grid[1:])):
        raise RangeError(f'The s grid must be strictly decreasing, got {s_grid}.')
    return s_grid


def lambda_s(analysis: DomainAnalysis, b: Sequence[int], s: float, K: float) -> float:
    """``lambda_s = (1/4)^{b_2 - 1} K s^{alpha_1 + 2} log(1/s)``."""
    return .25 ** (int(b[1]) - 1) * K * s ** (analysis.alpha_cover[0] + 2) * math.log(1 / s)


def blowup_denominator(analysis: DomainAnalysis, b: Sequence[int], s: float, log_power: float = 0.) -> float:
    """
    ``int_{F_s} rho_{2 alpha} (log 1/rho_{2 alpha})^t dV``; closed form for
    ``t = 0``, quadrature otherwise.
    """
    F = counterexample_set(analysis, b, s)
    twice = [2 * a for a in analysis.alpha_cover]
    return weighted_set_integral(F, twice, twice, log_power)


def _stratum_sizes(fractions: np.ndarray, samples: int) -> np.ndarray:
    shares = fractions * np.array(STRATUM_WEIGHTS, dtype=float)
    return np.maximum(2, np.round(samples * shares / shares.sum())).astype(int)


def superlevel_measure(series: MonomialSeries, alpha: Sequence, s: float, threshold: float, samples: int,
                       rng: np.random.Generator, seed: Optional[int] = None) -> EstimateResult:
    """
    Stratified Monte Carlo estimate of ``mu{z in D^n : |h(z)| > threshold rho_alpha(z)}``.

    ``|z_1|`` is stratified on ``[0, s)``, ``[s, sqrt(s))`` and
    ``[sqrt(s), 1)``, with the middle stratum sampled at four times the
    density of the others; the other coordinates are uniform on the disc.
    """
    n = series.dimension
    edges = np.array([0., s, math.sqrt(s), 1.])
    fractions = edges[1:] ** 2 - edges[:-1] ** 2
    sizes = _stratum_sizes(fractions, samples)
    estimate = 0.
    variance = 0.
    shares = []
    for (lower, upper), fraction, size in zip(zip(edges[:-1], edges[1:]), fractions, sizes):
        radii = np.sqrt(rng.uniform(0., 1., (size, n)))
        radii[:, 0] = np.sqrt(lower ** 2 + (upper ** 2 - lower ** 2) * rng.uniform(0., 1., size))
        z = radii * np.exp(2j * np.pi * rng.uniform(0., 1., (size, n)))
        inside = np.abs(series(z)) > threshold * rho(alpha, z)
        q = inside.mean()
        estimate += fraction * q
        variance += fraction ** 2 * q * (1 - q) / size
        shares.append((lower, upper, fraction * q, size))
    for lower, upper, share, size in shares:
        if size == 2 and share > MAX_FLOOR_SHARE * estimate > 0:
            warnings.warn(f'Stratum [{lower:.3g}, {upper:.3g}) carries {share / estimate:.0%} of the superlevel '
                          f'measure on {size} samples.', StratumWarning)
    scale = math.pi ** n
    return EstimateResult(scale * estimate, scale * math.sqrt(variance), int(sizes.sum()), seed, 'montecarlo')


def blowup_experiment(analysis: DomainAnalysis, b: Sequence[int], s_grid: Sequence[float],
                      truncation_degree: int = DEFAULT_TRUNCATION, samples: int = 10 ** 6, seed: int = 0,
                      log_power: float = 0., fit_s: Optional[float] = None, workers: int = 1,
                      radius: float = DEFAULT_BOX_RADIUS) -> BlowupResult:
    """
    Measure the weak-type ratio along ``s_grid`` and fit the slope of
    ``log(ratio)`` against ``log(log(1/s))``.

    ``K`` is fitted once at ``fit_s`` (default: the largest ``s``) on the
    box of :func:`~bergman_lab.bergman.lower_bound_box`.  With
    ``log_power = t`` the denominator carries ``(log 1/rho_{2 alpha})^t``
    and the expected slope is ``p* - 1 - t``.

    Raises
    ------
    HypothesisViolated
        If ``(analysis, b)`` is not a counterexample configuration.
    NonConvergent
        If the superlevel measure at the smallest ``s`` has a 95% interval
        wider than 30% of its value.
    """
    b = check_counterexample_hypotheses(analysis, b)
    s_grid = validate_s_grid(s_grid)
    fit_s = s_grid[0] if fit_s is None else float(fit_s)
    K, box = fit_lower_bound_constant(analysis, b, fit_s, truncation_degree, radius)
    alpha = analysis.alpha_cover
    p_star = float(analysis.p_star)

    def task(index: int) -> BlowupRow:
        s = s_grid[index]
        series = counterexample_series(analysis, b, s, truncation_degree)
        threshold = lambda_s(analysis, b, s, K)
        measure = superlevel_measure(series, alpha, s, threshold, samples, task_rng(seed, index), seed)
        denominator = blowup_denominator(analysis, b, s, log_power)
        ratio = threshold ** p_star * measure.value / denominator
        logger.info('s = %.6g: lambda = %.6g, measure = %.6g +- %.2g, ratio = %.6g.', s, threshold,
                    measure.value, measure.standard_error, ratio)
        return BlowupRow(s, threshold, measure, denominator, ratio)

    rows = tuple(_run_tasks(task, list(range(len(s_grid))), workers))
    deepest = rows[-1].superlevel_measure
    if 2 * deepest.standard_error > MAX_RELATIVE_CI * deepest.value:
        raise NonConvergent(f'Superlevel measure {deepest.value:.6g} +- {deepest.standard_error:.2g} at '
                            f's = {rows[-1].s:.6g} is not resolved; increase the sample count.')
    if len(rows) >= 2:
        log_log = np.log(np.log(1 / np.array([row.s for row in rows])))
        slope = float(np.polyfit(log_log, np.log([row.ratio for row in rows]), 1)[0])
    else:
        slope = float('nan')
    comment = (f'blowup: ratio = lambda_s^p* mu{{|h_s|/rho_alpha > lambda_s}} / int_F_s rho_2alpha '
               f'(log 1/rho_2alpha)^{log_power}; b = {list(b)}, truncation = {truncation_degree}, '
               f'samples = {samples}, seed = {seed}\n'
               'columns: s, log_inv_s, lambda_s, superlevel_measure, superlevel_se, denominator, ratio')
    return BlowupResult(rows, slope, p_star - 1 - log_power, K, fit_s, box, comment)
