# coding: utf-8
"""
Monte Carlo and quadrature estimates of weighted norms, of the positive
Bergman operator and of the ratios of the restricted-type inequalities.

Every random stream is derived from ``(seed, task_index)`` by
:func:`task_rng`, so results do not depend on the number of workers.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from io import StringIO
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .core import DomainAnalysis, LabError, TrivialDomainError, exponent_vector
from .measure import (RangeError, concentration_exponent, polydisc_critical_exponent, rho, set_volume,
                      top_multiplicity, validate_weight, weighted_set_integral)
from .reinhardt import (RadialConstraint, ReinhardtAngularSet, domain_set, polydisc, pullback_set,
                        sample_uniform, sublevel_set)

logger = logging.getLogger(__name__)

METHODS = ('quadrature', 'montecarlo')
#: Default number of Monte Carlo samples.
DEFAULT_SAMPLES = 10 ** 5
#: Default number of points of the level grid of :func:`weak_quasinorm`.
DEFAULT_GRID_SIZE = 64
#: Minimum number of nonzero samples before the tail detector is consulted.
TAIL_MIN_SAMPLES = 100
#: Share of the samples forming the tail, and the mass fraction that flags it.
TAIL_FRACTION, TAIL_MASS = .01, .5
#: Inner source points are evaluated against this many outer points at once.
KERNEL_BLOCK = 1 << 20
#: Float format of every CSV report.
FLOAT_FORMAT = '%.12g'


class NonIntegrable(LabError):
    pass


class NonConvergent(LabError):
    pass


@dataclass(frozen=True)
class EstimateResult:
    value: float
    standard_error: float
    samples: int
    seed: Optional[int]
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f'Method must be one of {METHODS}, got {self.method!r}.')
        if not self.standard_error >= 0:
            raise ValueError(f'Standard error must be nonnegative, got {self.standard_error}.')

    def to_dict(self) -> dict:
        return asdict(self)


def task_rng(seed: int, task_index: int = 0) -> np.random.Generator:
    """Counter-based generator of task ``task_index`` under ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(task_index), ))))


def _run_tasks(func: Callable, tasks: Sequence, workers: int = 1) -> List:
    # `Executor.map` yields results in task order.
    if workers <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, tasks))


def _evaluate(f, points: np.ndarray) -> np.ndarray:
    if callable(f):
        values = np.asarray(f(points))
        return np.broadcast_to(values, (len(points), )) if values.ndim == 0 else values
    return np.full(len(points), f, dtype=complex if isinstance(f, complex) else float)


def _check_tail(values: np.ndarray):
    nonzero = np.sort(values[values > 0])
    if len(nonzero) < TAIL_MIN_SAMPLES:
        return
    top = max(1, math.ceil(TAIL_FRACTION * len(nonzero)))
    fraction = nonzero[-top:].sum() / nonzero.sum()
    if fraction > TAIL_MASS:
        raise NonIntegrable(f'The largest {top} of {len(nonzero)} samples carry {fraction:.1%} of the mass.')


def _weights(points: np.ndarray, weight_exponent, log_exponent, log_weight_power: float) -> np.ndarray:
    weights = np.ones(len(points))
    if weight_exponent is not None:
        weights = weights * rho(weight_exponent, points)
    if log_weight_power:
        if log_exponent is None:
            raise ValueError('A log weight needs its exponent.')
        weights = weights * (-np.log(rho(log_exponent, points))) ** log_weight_power
    return weights


def lp_norm(f, region: ReinhardtAngularSet, p: float, weight_exponent: Optional[Sequence] = None,
            log_weight_power: float = 0., log_exponent: Optional[Sequence] = None,
            samples: int = DEFAULT_SAMPLES, seed: int = 0, task_index: int = 0) -> EstimateResult:
    """
    Monte Carlo estimate of

        ( int_region |f|^p rho_{weight_exponent} (-log rho_{log_exponent})^{log_weight_power} dV )^{1/p}.

    Points are drawn uniformly on ``region``; its volume comes from
    :func:`~bergman_lab.measure.set_volume`.  The standard error is the
    sample standard error carried through the ``1/p`` power.

    Parameters
    ----------
    f : callable or number
        Evaluated on an array of points (one per row).

    Raises
    ------
    NonIntegrable
        If the largest 1% of the nonzero integrand samples carry more than
        half of their total.
    """
    if p < 1:
        raise RangeError(f'p must be at least 1, got {p}.')
    rng = task_rng(seed, task_index)
    batch = sample_uniform(region, samples, rng)
    volume = set_volume(region)
    values = np.abs(_evaluate(f, batch.points)) ** p
    values = values * _weights(batch.points, weight_exponent, log_exponent, log_weight_power)
    if not values.any():
        return EstimateResult(0., 0., samples, seed, 'montecarlo')
    _check_tail(values)
    integral = volume * values.mean()
    integral_se = volume * values.std(ddof=1) / math.sqrt(len(values)) if len(values) > 1 else 0.
    value = integral ** (1 / p)
    return EstimateResult(value, value * integral_se / (p * integral), samples, seed, 'montecarlo')


def level_grid(lower: float, upper: float, size: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    """
    Geometric grid from ``lower`` to ``upper``.  Grids of sizes
    ``2^k 63 + 1`` nest.
    """
    if size < 2 or lower == upper:
        return np.array([upper])
    t = np.arange(size) / (size - 1)
    grid = np.exp(math.log(lower) + t * (math.log(upper) - math.log(lower)))
    grid[0], grid[-1] = lower, upper
    return grid


def weak_quasinorm(f, region: ReinhardtAngularSet, p: float, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                   grid_size: int = DEFAULT_GRID_SIZE, task_index: int = 0) -> EstimateResult:
    """
    Estimate ``sup_y y mu{|f| > y}^{1/p}`` on ``region``.

    The supremum is taken over the left limits ``y mu{|f| >= y}^{1/p}`` at
    the points of :func:`level_grid` between the smallest positive and the
    largest sampled value of ``|f|``; functions with two values are exact.
    """
    if p <= 1:
        raise RangeError(f'p must exceed 1, got {p}.')
    rng = task_rng(seed, task_index)
    batch = sample_uniform(region, samples, rng)
    volume = set_volume(region)
    values = np.sort(np.abs(_evaluate(f, batch.points)))
    positive = values[values > 0]
    if not len(positive):
        return EstimateResult(0., 0., samples, seed, 'montecarlo')
    grid = level_grid(float(positive[0]), float(positive[-1]), grid_size)
    counts = len(values) - np.searchsorted(values, grid, side='left')
    fractions = counts / len(values)
    candidates = grid * (volume * fractions) ** (1 / p)
    best = int(np.argmax(candidates))
    q = fractions[best]
    measure_se = volume * math.sqrt(q * (1 - q) / len(values))
    value = float(candidates[best])
    standard_error = value * measure_se / (p * volume * q)
    return EstimateResult(value, standard_error, samples, seed, 'montecarlo')


def positive_projection(alpha: Sequence, source: ReinhardtAngularSet, points: np.ndarray,
                        inner: np.ndarray, volume: Optional[float] = None, phase: Optional[Sequence] = None):
    """
    Monte Carlo estimate of ``P+(rho_alpha 1_source)`` at each row of
    ``points``, from ``inner`` points uniform on ``source``.

    For a source without angular constraint the kernel is averaged over
    the angles in closed form, ``prod_j 1 / (pi (1 - |z_j|^2 |w_j|^2))``.
    ``phase`` does not change ``|rho_alpha e^{i phase . theta}|`` and is
    accepted for symmetry with the projection.

    Returns
    -------
    tuple of numpy.ndarray
        Estimates and their standard errors.
    """
    if volume is None:
        volume = set_volume(source)
    points = np.atleast_2d(np.asarray(points, dtype=complex))
    inner = np.atleast_2d(np.asarray(inner, dtype=complex))
    weights = rho(alpha, inner)
    total = np.zeros(len(points))
    total_sq = np.zeros(len(points))
    block = max(1, KERNEL_BLOCK // max(1, len(inner)))
    for start in range(0, len(points), block):
        z = points[start:start + block, None, :]
        if source.is_radial:
            kernel = np.prod(1 / (np.pi * (1 - np.abs(z) ** 2 * np.abs(inner[None]) ** 2)), axis=-1)
        else:
            kernel = np.abs(np.prod(1 / (np.pi * (1 - z * np.conj(inner[None])) ** 2), axis=-1))
        values = kernel * weights[None]
        total[start:start + block] = values.sum(axis=1)
        total_sq[start:start + block] = (values ** 2).sum(axis=1)
    count = len(inner)
    mean = total / count
    variance = np.maximum(total_sq / count - mean ** 2, 0) * count / max(count - 1, 1)
    return volume * mean, volume * np.sqrt(variance / count)


def positive_projection_norm(alpha: Sequence, source: ReinhardtAngularSet, p: float,
                             samples: int = DEFAULT_SAMPLES, seed: int = 0, task_index: int = 0,
                             power: bool = False) -> EstimateResult:
    """
    ``||P+(rho_alpha 1_source)||_{L^p(D^n)}`` by nested Monte Carlo.

    ``samples`` outer points are uniform on the polydisc; the inner
    expectation uses ``ceil(sqrt(samples))`` points of ``source``, shared by
    all outer points.  With ``power=True`` the ``p``-th power of the norm is
    returned.
    """
    rng = task_rng(seed, task_index)
    n = source.dimension
    volume = set_volume(source)
    if volume == 0:
        return EstimateResult(0., 0., samples, seed, 'montecarlo')
    inner = sample_uniform(source, math.ceil(math.sqrt(samples)), rng).points
    outer = sample_uniform(polydisc(n), samples, rng).points
    estimates, _ = positive_projection(alpha, source, outer, inner, volume)
    values = estimates ** p
    _check_tail(values)
    integral = math.pi ** n * values.mean()
    integral_se = math.pi ** n * values.std(ddof=1) / math.sqrt(len(values))
    if power:
        return EstimateResult(integral, integral_se, samples, seed, 'montecarlo')
    value = integral ** (1 / p)
    return EstimateResult(value, value * integral_se / (p * integral), samples, seed, 'montecarlo')


@dataclass
class ExperimentReport:
    """
    Rows of a suite plus the fitted summary; written as CSV with a leading
    ``#`` comment, a ``tag`` column (``DATA`` or ``FIT``) and the ``FIT``
    row last.
    """
    rows: pd.DataFrame
    fit: Dict[str, float] = field(default_factory=dict)
    comment: str = ''

    def to_frame(self) -> pd.DataFrame:
        df = self.rows.copy()
        df.insert(0, 'tag', 'DATA')
        for key in self.fit:
            if key not in df.columns:
                df[key] = np.nan
        if self.fit:
            fit_row = pd.DataFrame([{'tag': 'FIT', **self.fit}], columns=df.columns)
            df = pd.concat([df, fit_row], ignore_index=True) if len(df) else fit_row
        return df

    def to_csv(self, path_or_buf=None) -> Optional[str]:
        output = StringIO()
        if self.comment:
            for line in self.comment.splitlines():
                output.write(f'# {line}\n')
        self.to_frame().to_csv(output, index=False, float_format=FLOAT_FORMAT, na_rep='',
                               lineterminator='\n')
        text = output.getvalue()
        if path_or_buf is None:
            return text
        if hasattr(path_or_buf, 'write'):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, 'w', newline='') as output_file:
                output_file.write(text)


def trend_fit(parameters: Sequence[float], ratios: Sequence[float]) -> Dict[str, float]:
    """
    Least-squares slope of ``log(ratio)`` against the family parameter, with
    the largest ratio and the family median.
    """
    ratios = np.asarray(ratios, dtype=float)
    fit = {'max_ratio': float(ratios.max()), 'median_ratio': float(np.median(ratios))}
    parameters = np.asarray(parameters, dtype=float)
    keep = np.isfinite(parameters) & (ratios > 0)
    if keep.sum() >= 2:
        fit['slope'] = float(np.polyfit(parameters[keep], np.log(ratios[keep]), 1)[0])
    return fit


def _labels(sets, labels):
    if labels is None:
        return [f'set{i}' for i in range(len(sets))]
    if len(labels) != len(sets):
        raise ValueError('Need one label per set.')
    return list(labels)


def _parameters(sets, parameters):
    if parameters is None:
        return [np.nan] * len(sets)
    if len(parameters) != len(sets):
        raise ValueError('Need one parameter per set.')
    return [float(v) for v in parameters]


def _report(records: List[dict], columns: List[str], parameters, comment: str) -> ExperimentReport:
    rows = pd.DataFrame(records, columns=columns)
    fit = trend_fit(parameters, rows['ratio']) if len(rows) else {}
    return ExperimentReport(rows, fit, comment)


def restricted_ratio_suite(analysis: DomainAnalysis, sets: Sequence[ReinhardtAngularSet],
                           samples: int = DEFAULT_SAMPLES, seed: int = 0, p=None,
                           parameters: Optional[Sequence[float]] = None, labels: Optional[Sequence[str]] = None,
                           workers: int = 1) -> ExperimentReport:
    """
    Both sides of the weighted restricted-type estimate of ``P+`` on the
    monomial polyhedron, for every image-side set ``E``:

        lhs = ||P+_D(rho_alpha 1_{phi^{-1} E})||_{L^p(D^n)},
        rhs = ||1_E||_{L^p(U, (-log w)^eta)} = (|det A| int_{phi^{-1} E} rho_{2 alpha} (-log rho_alpha)^eta dV)^{1/p},

    with ``alpha = 1A - 1`` and ``w o phi = rho_alpha``.  With ``p = None``
    (or ``p*``) the endpoint estimate uses ``eta = (m - 1)(p* - 1)``; for
    ``p`` in ``(p*, 2]`` the unweighted estimate uses ``eta = 0``.

    Raises
    ------
    TrivialDomainError
        If the domain is a polydisc.
    RangeError
        If ``p`` lies outside ``[p*, 2]``.
    """
    if analysis.trivial:
        raise TrivialDomainError('Restricted-type ratios need a nontrivial monomial polyhedron.')
    p_star = analysis.p_star
    p = p_star if p is None else exponent_vector([p])[0]
    if p == p_star:
        eta = (analysis.m - 1) * (p_star - 1)
    elif p_star < p <= 2:
        eta = Fraction(0)
    else:
        raise RangeError(f'p must be p* = {p_star} or lie in (p*, 2], got {p}.')
    labels = _labels(sets, labels)
    parameters = _parameters(sets, parameters)
    alpha = analysis.alpha_cover
    twice = [2 * a for a in alpha]

    def task(index: int) -> dict:
        E = sets[index]
        F = pullback_set(analysis, E)
        lhs = positive_projection_norm(alpha, F, float(p), samples, seed, index)
        rhs = (analysis.degree * weighted_set_integral(F, twice, alpha, float(eta))) ** (1 / float(p))
        logger.info('Set %s: lhs = %.6g +- %.2g, rhs = %.6g.', labels[index], lhs.value, lhs.standard_error, rhs)
        return {'label': labels[index], 'parameter': parameters[index], 'p': float(p),
                'lhs': lhs.value, 'lhs_se': lhs.standard_error, 'rhs': rhs,
                'ratio': lhs.value / rhs if rhs else np.nan,
                'ratio_se': lhs.standard_error / rhs if rhs else np.nan}

    records = _run_tasks(task, list(range(len(sets))), workers)
    columns = ['label', 'parameter', 'p', 'lhs', 'lhs_se', 'rhs', 'ratio', 'ratio_se']
    comment = (f'restricted ratio: lhs = ||P+(rho_alpha 1_F)||_p on the polydisc, rhs = ||1_E||_p with '
               f'(-log w)^{eta}; p = {p}, samples = {samples}, seed = {seed}\ncolumns: ' + ', '.join(columns))
    return _report(records, columns, parameters, comment)


def polydisc_inequality_suite(alpha: Sequence, sets: Sequence[ReinhardtAngularSet], p=None,
                              mode: str = 'projection', samples: int = DEFAULT_SAMPLES, seed: int = 0, t=2,
                              epsilon: Optional[float] = None, parameters: Optional[Sequence[float]] = None,
                              labels: Optional[Sequence[str]] = None, workers: int = 1) -> ExperimentReport:
    """
    Both sides of the weighted estimates of ``P+`` on the polydisc, or of
    the concentration inequality they rest on, for every set ``F``.

    ``mode='projection'``
        ``lhs = ||P+(rho_alpha 1_F)||_p^p`` (Monte Carlo) and
        ``rhs = int_F rho_{2 alpha} (-log rho_alpha)^{(p* - 1)(m(alpha) - 1)}``
        at ``p = p*`` (the default), or ``rhs = int_F rho_{2 alpha}`` for
        ``p`` in ``(p*, 2]``.
    ``mode='concentration'``
        ``lhs = int_F rho_alpha`` and
        ``rhs = (int_F rho_{t alpha} (-log rho_alpha)^{(p - 1)(m(alpha) - 1)})^{1/p}``
        with ``p = (t |alpha| + 2) / (|alpha| + 2)``; with ``epsilon`` the
        right side is ``(int_F rho_{t alpha})^{1 / (p + epsilon)}``.  Both
        sides are computed by quadrature.

    Raises
    ------
    RangeError
        If ``p`` lies outside ``(p*, 2]`` in projection mode.
    """
    alpha = validate_weight(alpha)
    labels = _labels(sets, labels)
    parameters = _parameters(sets, parameters)
    m = top_multiplicity(alpha)
    twice = [2 * a for a in alpha]
    if mode == 'projection':
        p_star = polydisc_critical_exponent(alpha)
        p = p_star if p is None else exponent_vector([p])[0]
        if p == p_star:
            eta = (p_star - 1) * (m - 1)
        elif p_star < p <= 2:
            eta = Fraction(0)
        else:
            raise RangeError(f'p must lie in (p*, 2] = ({p_star}, 2], got {p}.')

        def task(index: int) -> dict:
            F = sets[index]
            lhs = positive_projection_norm(alpha, F, float(p), samples, seed, index, power=True)
            rhs = weighted_set_integral(F, twice, alpha, float(eta))
            return {'label': labels[index], 'parameter': parameters[index], 'p': float(p),
                    'lhs': lhs.value, 'lhs_se': lhs.standard_error, 'rhs': rhs,
                    'ratio': lhs.value / rhs if rhs else np.nan,
                    'ratio_se': lhs.standard_error / rhs if rhs else np.nan}

        comment = (f'polydisc projection: lhs = ||P+(rho_alpha 1_F)||_p^p, rhs = int_F rho_2alpha '
                   f'(-log rho_alpha)^{eta}; alpha = {[str(a) for a in alpha]}, p = {p}, samples = {samples}, '
                   f'seed = {seed}')
    elif mode == 'concentration':
        p = concentration_exponent(alpha, t)
        t = exponent_vector([t])[0]
        eta = (p - 1) * (m - 1)
        scaled = [t * a for a in alpha]

        def task(index: int) -> dict:
            F = sets[index]
            lhs = weighted_set_integral(F, alpha)
            if epsilon is None:
                rhs = weighted_set_integral(F, scaled, alpha, float(eta)) ** (1 / float(p))
            else:
                rhs = weighted_set_integral(F, scaled) ** (1 / (float(p) + epsilon))
            return {'label': labels[index], 'parameter': parameters[index], 'p': float(p),
                    'lhs': lhs, 'lhs_se': 0., 'rhs': rhs,
                    'ratio': lhs / rhs if rhs else np.nan, 'ratio_se': 0.}

        if epsilon is None:
            shape = f'(int_E rho_{{t alpha}} (-log rho_alpha)^{eta})^(1/p)'
        else:
            shape = f'(int_E rho_{{t alpha}})^(1/(p + {epsilon}))'
        comment = (f'concentration: lhs = int_E rho_alpha, rhs = {shape}; '
                   f'alpha = {[str(a) for a in alpha]}, t = {t}, p = {p}')
    else:
        raise ValueError(f"mode must be 'projection' or 'concentration', got {mode!r}.")

    records = _run_tasks(task, list(range(len(sets))), workers)
    columns = ['label', 'parameter', 'p', 'lhs', 'lhs_se', 'rhs', 'ratio', 'ratio_se']
    return _report(records, columns, parameters, comment + '\ncolumns: ' + ', '.join(columns))


def dyadic_family(alpha: Sequence, ks: Sequence[int]) -> List[ReinhardtAngularSet]:
    """``F_k = {rho_alpha < 2^-k}`` in the polydisc."""
    return [sublevel_set(alpha, 2. ** -int(k)) for k in ks]


def weight_family(analysis: DomainAnalysis, ks: Sequence[int]) -> List[ReinhardtAngularSet]:
    """
    ``E_k = {w < 2^-k}`` inside the monomial polyhedron; the preimage of
    ``E_k`` is ``{rho_{1A - 1} < 2^-k}``.
    """
    domain = domain_set(analysis)
    return [ReinhardtAngularSet(analysis.dimension,
                                domain.radial + (RadialConstraint(analysis.weight_exponent, 2. ** -int(k)), ))
            for k in ks]
