# coding: utf-8
"""
Monomial weights ``rho_alpha`` and their integrals over Reinhardt regions.

Volumes are measured in ``z``-space: each angular variable contributes
``2 pi`` and each radial integrand carries the polar Jacobian ``r_j``.
:func:`region_integral_As` and :func:`radial_moment` integrate over the
radius cube with plain ``dr``.
"""
import math
import warnings
from fractions import Fraction
from typing import Callable, Dict, Iterable, Sequence, Tuple

import numpy as np
from scipy import integrate

from .core import ExponentVector, LabError, exponent_vector
from .reinhardt import RadialConstraint, ReinhardtAngularSet

#: Relative error targeted by every adaptive quadrature.
QUADRATURE_RTOL = 1e-8
#: Subinterval limit of each adaptive rule.
QUADRATURE_LIMIT = 200
#: Branch tolerance of :func:`region_integral_As` for inexact exponents.
BRANCH_TOLERANCE = 1e-12


class DomainError(LabError, ValueError):
    pass


class RangeError(LabError, ValueError):
    pass


class ZeroDirection(LabError, ValueError):
    pass


class QuadratureWarning(RuntimeWarning):
    pass


def _floats(values: Sequence) -> np.ndarray:
    return np.array([float(v) for v in values])


def max_norm(alpha: Sequence) -> Fraction:
    return max(exponent_vector(alpha))


def top_multiplicity(alpha: Sequence) -> int:
    """``m(alpha)``: how many entries of ``alpha`` equal its largest entry."""
    alpha = exponent_vector(alpha)
    return alpha.count(max(alpha))


def validate_weight(alpha: Sequence) -> ExponentVector:
    """Return ``alpha`` as an exponent vector; entries must be ``>= 0``, not all zero."""
    alpha = exponent_vector(alpha)
    if any(a < 0 for a in alpha):
        raise DomainError(f'Weight exponents must be nonnegative, got {[str(a) for a in alpha]}.')
    if not any(alpha):
        raise DomainError('Weight exponent must be nonzero.')
    return alpha


def polydisc_critical_exponent(alpha: Sequence) -> Fraction:
    """``p* = (2 |alpha|_inf + 2) / (|alpha|_inf + 2)``."""
    norm = max_norm(validate_weight(alpha))
    return (2 * norm + 2) / (norm + 2)


def concentration_exponent(alpha: Sequence, t) -> Fraction:
    """``p = (t |alpha|_inf + 2) / (|alpha|_inf + 2)`` for ``t > 1``."""
    t = exponent_vector([t])[0]
    if t <= 1:
        raise RangeError(f't must exceed 1, got {t}.')
    norm = max_norm(validate_weight(alpha))
    return (t * norm + 2) / (norm + 2)


def rho(alpha: Sequence, z: np.ndarray):
    """
    Evaluate ``rho_alpha(z) = prod_j |z_j|^{alpha_j}`` with ``0^0 = 1``.

    ``z`` is one point or an array with one point per row.

    Raises
    ------
    DomainError
        If a coordinate with a negative exponent vanishes.
    """
    a = _floats(exponent_vector(alpha))
    modulus = np.abs(np.asarray(z, dtype=complex))
    if modulus.shape[-1] != len(a):
        raise ValueError(f'Expected {len(a)} coordinates, got {modulus.shape[-1]}.')
    if ((a < 0) & (modulus == 0)).any():
        raise DomainError('0 raised to a negative power.')
    with np.errstate(divide='ignore', invalid='ignore'):
        powers = np.where(a == 0, 1., modulus ** a)
    values = powers.prod(axis=-1)
    return float(values) if np.ndim(values) == 0 else values


def _adaptive_quad(func: Callable[[float], float], lower: float, upper: float) -> float:
    if upper <= lower:
        return 0.
    result = integrate.quad(func, lower, upper, epsabs=0., epsrel=QUADRATURE_RTOL, limit=QUADRATURE_LIMIT,
                            full_output=1)
    value, error = result[0], result[1]
    if len(result) > 3 and error > 10 * QUADRATURE_RTOL * abs(value):
        warnings.warn(f'Quadrature on [{lower}, {upper}] reached error {error:.3g} for value {value:.6g}: '
                      f'{result[3]}', QuadratureWarning)
    return value


def _sublevel(exponents: Tuple[float, ...], s: float) -> float:
    # `exponents` are positive and sorted, the largest one last.
    k = len(exponents)
    if s >= 1:
        return math.pi ** k
    a = exponents[-1]
    if k == 1:
        return math.pi * s ** (2 / a)
    rest = exponents[:-1]
    log_s = math.log(s)
    # r_k < s^{1/a}: the remaining coordinates are unconstrained.
    inner_disc = math.pi ** k * s ** (2 / a)

    def shell(x: float) -> float:
        # r_k = exp(-x); the other coordinates satisfy rho < s / r_k^a.
        return 2 * math.pi * math.exp(-2 * x) * _sublevel(rest, math.exp(min(log_s + a * x, 0.)))

    return inner_disc + _adaptive_quad(shell, 0., -log_s / a)


def sublevel_volume(alpha: Sequence, s: float) -> float:
    """
    Volume of ``{z in D^n : rho_alpha(z) < s}``.

    The last (largest) exponent is peeled off one coordinate at a time: with
    ``V_k`` the volume in ``k`` coordinates,

        V_k(s) = pi^k s^{2/a_k} + int_{s^{1/a_k}}^1 2 pi r V_{k-1}(s / r^{a_k}) dr,

    integrated in ``x = -log r`` by adaptive quadrature.  Zero exponents
    contribute a factor ``pi`` each.
    """
    alpha = exponent_vector(alpha)
    if any(a < 0 for a in alpha):
        raise DomainError(f'Sublevel exponents must be nonnegative, got {[str(a) for a in alpha]}.')
    if not any(alpha):
        raise DomainError('Sublevel exponent must be nonzero.')
    if not 0 < s <= 1:
        raise RangeError(f's must lie in (0, 1], got {s}.')
    positive = tuple(sorted(float(a) for a in alpha if a > 0))
    return math.pi ** (len(alpha) - len(positive)) * _sublevel(positive, float(s))


def region_integral_As(d: Sequence, s: float) -> float:
    """
    Closed form of ``int_{A(s)} r^d dr`` over the radius cube, where
    ``A(s) = {r_1 r_2 < s, s < r_1 < sqrt(s)}``.

    The ``d_1 == d_2`` branch is chosen by exact comparison when both
    exponents are rational and within :data:`BRANCH_TOLERANCE` otherwise.

    Raises
    ------
    RangeError
        If ``s`` is not in ``(0, 1/4)``.
    """
    exact = all(isinstance(v, (int, Fraction)) for v in d)
    d = exponent_vector(d) if exact else tuple(float(v) for v in d)
    if len(d) < 2:
        raise ValueError('A(s) lives in at least two dimensions.')
    if any(v < 0 for v in d):
        raise DomainError(f'Exponents must be nonnegative, got {list(map(str, d))}.')
    if not 0 < s < .25:
        raise RangeError(f's must lie in (0, 1/4), got {s}.')
    s = float(s)
    d1, d2 = d[0], d[1]
    denominator = math.prod(float(v) + 1 for v in d[1:])
    equal = d1 == d2 if exact else abs(d1 - d2) <= BRANCH_TOLERANCE
    d1, d2 = float(d1), float(d2)
    if equal:
        return s ** (d1 + 1) * math.log(1 / s) / (2 * denominator)
    return (s ** ((d1 + d2) / 2 + 1) - s ** (d1 + 1)) / ((d1 - d2) * denominator)


def angular_character_integral(kappa: Sequence[int], kappa0: Sequence[int]) -> complex:
    """
    ``int_{[0, 2 pi)^n} 1_{sin(kappa0 . theta) >= 0} e^{i kappa . theta} dtheta``.

    Expanding the square wave ``1_{sin u >= 0} = sum_m c_m e^{imu}`` with
    ``c_0 = 1/2``, ``c_m = -i / (pi m)`` for odd ``m`` and ``0`` for even
    ``m != 0``, only the harmonic with ``kappa = -m kappa0`` survives.

    Raises
    ------
    ZeroDirection
        If ``kappa0 == 0``.
    """
    kappa = [int(k) for k in kappa]
    kappa0 = [int(k) for k in kappa0]
    if len(kappa) != len(kappa0):
        raise ValueError('kappa and kappa0 must have the same length.')
    if not any(kappa0):
        raise ZeroDirection('kappa0 must be nonzero.')
    n = len(kappa)
    j0 = next(j for j, k in enumerate(kappa0) if k)
    if kappa[j0] % kappa0[j0]:
        return 0j
    m = -kappa[j0] // kappa0[j0]
    if any(k + m * k0 for k, k0 in zip(kappa, kappa0)):
        return 0j
    if m == 0:
        coefficient = .5
    elif m % 2 == 0:
        return 0j
    else:
        coefficient = -1j / (math.pi * m)
    return (2 * math.pi) ** n * coefficient


def monomial_l2_norm_sq(gamma: Sequence[int]) -> float:
    """``||z^gamma||^2 = pi^n / prod_j (gamma_j + 1)`` on the unit polydisc."""
    gamma = [int(g) for g in gamma]
    if any(g < 0 for g in gamma):
        raise DomainError(f'Multi-index must be nonnegative, got {gamma}.')
    return math.pi ** len(gamma) / math.prod(g + 1 for g in gamma)


def _level_bounds(constraints: Sequence[RadialConstraint], level: int, outer: Sequence[float]):
    # `outer` holds r_{level+1}, ..., r_{n-1}.
    lower, upper = 0., 1.
    for constraint in constraints:
        c = constraint.exponents
        tau = math.log(constraint.bound)
        for k, r_k in enumerate(outer, start=level + 1):
            if c[k] != 0:
                if r_k <= 0:
                    return 0., 0.
                tau -= c[k] * math.log(r_k)
        exponent = tau / c[level]
        limit = math.exp(exponent) if exponent < 700 else math.inf
        if (constraint.relation == 'lt') == (c[level] > 0):
            upper = min(upper, limit)
        else:
            lower = max(lower, limit)
    return lower, max(lower, upper)


def radial_integral(region: ReinhardtAngularSet, func: Callable[[np.ndarray], float]) -> float:
    """
    ``int func(r) dr`` over the radial part of ``region`` inside ``[0, 1)^n``.

    Nested adaptive quadrature; each constraint is enforced exactly as an
    interval of the innermost variable of its support.
    """
    n = region.dimension
    owned = [[] for _ in range(n)]
    for constraint in region.radial:
        support = constraint.support
        if len(support) == 0:
            if not constraint.holds(np.zeros(n)):
                return 0.
            continue
        owned[support[0]].append(constraint)

    def integrand(*r):
        return func(np.array(r))

    ranges = [(lambda *outer, level=level: _level_bounds(owned[level], level, outer)) for level in range(n)]
    options = [{'epsabs': 0., 'epsrel': QUADRATURE_RTOL, 'limit': QUADRATURE_LIMIT}] * n
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always', integrate.IntegrationWarning)
        value, error = integrate.nquad(integrand, ranges, opts=options)
    if caught and error > 10 * QUADRATURE_RTOL * abs(value):
        warnings.warn(f'Nested quadrature reached error {error:.3g} for value {value:.6g}.', QuadratureWarning)
    return value


def _shell_parameter(region: ReinhardtAngularSet):
    """Return ``s`` if the radial part of ``region`` is exactly ``A(s)``."""
    if len(region.radial) != 3:
        return None
    n = region.dimension
    product = exponent_vector([1, 1] + [0] * (n - 2))
    first = exponent_vector([1] + [0] * (n - 1))
    by_kind = {(c.c, c.relation): c.bound for c in region.radial}
    if len(by_kind) != 3:
        return None
    s = by_kind.get((product, 'lt'))
    if s is None or by_kind.get((first, 'ge')) != s or (first, 'lt') not in by_kind:
        return None
    if not math.isclose(by_kind[(first, 'lt')] ** 2, s, rel_tol=1e-12) or not 0 < s < .25:
        return None
    return s


def _box_limits(region: ReinhardtAngularSet):
    """Per-coordinate radius intervals if every constraint involves one coordinate."""
    n = region.dimension
    lower, upper = np.zeros(n), np.ones(n)
    for constraint in region.radial:
        support = constraint.support
        if len(support) != 1:
            return None
        j = support[0]
        c = constraint.exponents[j]
        limit = constraint.bound ** (1 / c)
        if (constraint.relation == 'lt') == (c > 0):
            upper[j] = min(upper[j], limit)
        else:
            lower[j] = max(lower[j], limit)
    return lower, np.maximum(lower, upper)


def radial_moment(region: ReinhardtAngularSet, d: Sequence) -> float:
    """
    ``int r^d dr`` over the radial part of ``region``.

    Closed forms cover the full cube, boxes and ``A(s)``; anything else goes
    through :func:`radial_integral`.
    """
    if len(d) != region.dimension:
        raise ValueError(f'Expected {region.dimension} exponents, got {len(d)}.')
    exponents = _floats(d)
    if (exponents <= -1).any():
        raise DomainError(f'Radial moment diverges for exponents {exponents.tolist()}.')
    limits = _box_limits(region)
    if limits is not None:
        lower, upper = limits
        return float(np.prod((upper ** (exponents + 1) - lower ** (exponents + 1)) / (exponents + 1)))
    s = _shell_parameter(region)
    if s is not None:
        return region_integral_As(d, s)
    return radial_integral(region, lambda r: float(np.prod(r ** exponents)))


def set_volume(region: ReinhardtAngularSet) -> float:
    """Lebesgue measure of ``region``; an angular constraint halves it."""
    volume = (2 * math.pi) ** region.dimension * radial_moment(region, [1] * region.dimension)
    return volume / 2 if region.angular is not None else volume


def weighted_set_integral(region: ReinhardtAngularSet, exponent: Sequence, log_exponent: Sequence = None,
                          log_power: float = 0.) -> float:
    """
    ``int_region rho_exponent (-log rho_log_exponent)^log_power dV`` by
    quadrature.  The integrand is radial, so an angular constraint halves
    the result.
    """
    n = region.dimension
    a = _floats(exponent_vector(exponent))
    angular_measure = (2 * math.pi) ** n / (2 if region.angular is not None else 1)
    if log_power == 0:
        return angular_measure * radial_moment(region, list(a + 1))
    if log_exponent is None:
        raise ValueError('A log weight needs its exponent.')
    b = _floats(exponent_vector(log_exponent))
    if (b < 0).any():
        raise DomainError('Log weight exponents must be nonnegative.')

    def integrand(r: np.ndarray) -> float:
        with np.errstate(divide='ignore'):
            log_r = np.log(r)
        depth = -float(np.where(b == 0, 0., b * log_r).sum())
        return float(np.prod(r ** (a + 1))) * depth ** log_power

    return angular_measure * radial_integral(region, integrand)


def dominant_index(ratio: float, mu: int, indices: Iterable[int]) -> Tuple[int, float]:
    """
    For ``0 < ratio < 1`` and an integer ``mu >= 0``, find ``j*`` in
    ``indices`` with ``sum_{j in I} j^mu ratio^j <= C j*^mu ratio^{j*}``.

    The terms grow while ``((j + 1) / j)^mu ratio >= 1``; ``j*`` is the
    better of the two indices of ``I`` around the peak.

    Returns
    -------
    tuple
        ``(j*, C)`` with ``C`` the realized constant ``sum / term(j*)``.
    """
    if not 0 < ratio < 1:
        raise RangeError(f'ratio must lie in (0, 1), got {ratio}.')
    indices = sorted(set(int(j) for j in indices))
    if not indices:
        raise ValueError('indices must be nonempty.')

    def term(j: int) -> float:
        return float(j) ** mu * ratio ** j

    # The largest term sits at peak + 1, which is j = 0 when mu = 0.
    peak = -1 if mu == 0 else math.floor(1 / (ratio ** (-1 / mu) - 1))
    below = [j for j in indices if j <= peak + 1]
    above = [j for j in indices if j >= peak + 1]
    candidates = ([below[-1]] if below else []) + ([above[0]] if above else [])
    j_star = max(candidates, key=term)
    total = sum(term(j) for j in indices)
    if total == 0:
        return j_star, 1.
    return j_star, total / term(j_star)


def fit_sublevel_exponents(alpha: Sequence, s_values: Sequence[float]) -> Dict[str, float]:
    """
    Least-squares check of ``|{rho_alpha < s}| ~ s^{2/|alpha|} log(1/s)^{m-1}``.

    The s-power is fitted after removing the known log factor and the log
    exponent after removing the known power of ``s``.
    """
    alpha = validate_weight(alpha)
    s_values = np.array([float(s) for s in s_values])
    if len(s_values) < 2 or (s_values >= 1).any():
        raise RangeError('Need at least two values of s in (0, 1).')
    volumes = np.array([sublevel_volume(alpha, s) for s in s_values])
    power = 2 / float(max_norm(alpha))
    log_power = top_multiplicity(alpha) - 1
    log_s = np.log(s_values)
    log_log = np.log(-log_s)
    s_exponent, intercept = np.polyfit(log_s, np.log(volumes) - log_power * log_log, 1)
    log_exponent = np.polyfit(log_log, np.log(volumes) - power * log_s, 1)[0]
    return {'s_exponent': float(s_exponent), 'log_exponent': float(log_exponent),
            'constant': float(math.exp(intercept)), 'expected_s_exponent': power,
            'expected_log_exponent': float(log_power)}
