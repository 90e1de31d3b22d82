# coding: utf-8
"""
Bergman projection of the unit polydisc, the monomial covering map
``phi(z) = z^A`` and the functions ``h_s`` that witness the failure of the
endpoint weak-type estimate.

Every projection is computed as a truncated orthogonal expansion in the
monomials ``e_gamma(z) = z^gamma``:

    a_gamma = (gamma + 1)^1 / pi^n * <rho_alpha e^{i kappa_w . theta} 1_F, e_gamma>,

and the inner product splits into a radial moment and an angular factor.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from .core import (DomainAnalysis, LabError, TrivialDomainError, exponent_vector,
                   gamma_invariant_lattice, is_gamma_invariant)
from .measure import DomainError, RangeError, angular_character_integral, radial_moment, set_volume
from .reinhardt import ReinhardtAngularSet, domain_set, pullback_set, shell_region
from .series import MonomialSeries

logger = logging.getLogger(__name__)

#: Default truncation per coordinate of the series of ``h_s``.
DEFAULT_TRUNCATION = 48
#: Radius of the box on which ``|h_s|`` is bounded from below.
DEFAULT_BOX_RADIUS = Fraction(1, 8)
#: Largest ``s`` of the blow-up family.
S0 = Fraction(1, 16)


class TruncationTooSmall(LabError):
    pass


class HypothesisViolated(LabError, ValueError):
    pass


class UnsupportedSet(LabError, ValueError):
    pass


def polydisc_kernel(z: np.ndarray, w: np.ndarray):
    """
    Bergman kernel of the unit polydisc,
    ``K(z, w) = prod_j 1 / (pi (1 - z_j conj(w_j))^2)``.

    ``z`` and ``w`` are single points or arrays of points (one per row)
    that broadcast against each other.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    values = np.prod(1 / (np.pi * (1 - z * np.conj(w)) ** 2), axis=-1)
    return complex(values) if np.ndim(values) == 0 else values


def positive_kernel(z: np.ndarray, w: np.ndarray):
    """``|K(z, w)|``, the kernel of the positive operator ``P+``."""
    values = np.abs(polydisc_kernel(z, w))
    return float(values) if np.ndim(values) == 0 else values


def _monomial(z: np.ndarray, exponents: Sequence[int]) -> np.ndarray:
    # Nonnegative integer exponents only; the empty product is 1.
    result = np.ones(z.shape[:-1], dtype=complex)
    for k, e in enumerate(exponents):
        if e:
            result = result * z[..., k] ** int(e)
    return result


@dataclass(frozen=True)
class CoveringMap:
    """
    The proper map ``phi(z)_j = z^{A_j}`` (row ``j`` of ``A``) from the
    polydisc onto the monomial polyhedron, of ``degree = |det A|`` sheets.
    """
    A: Tuple[Tuple[int, ...], ...]
    alpha_cover: Tuple[int, ...]
    degree: int
    det_a: int

    @classmethod
    def from_analysis(cls, analysis: DomainAnalysis) -> 'CoveringMap':
        return cls(analysis.A, analysis.alpha_cover, analysis.degree, analysis.det_a)

    @property
    def dimension(self) -> int:
        return len(self.A)

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.stack([_monomial(z, row) for row in self.A], axis=-1)


def covering_map(analysis: DomainAnalysis) -> CoveringMap:
    return CoveringMap.from_analysis(analysis)


def det_phi_prime(covering: CoveringMap, z: np.ndarray):
    """Jacobian determinant ``det phi'(z) = det A * z^{1A - 1}``."""
    z = np.asarray(z, dtype=complex)
    values = covering.det_a * _monomial(z, covering.alpha_cover)
    return complex(values) if np.ndim(values) == 0 else values


def _phase_vector(alpha: Sequence, phase) -> Tuple[int, ...]:
    if phase is None:
        return (0, ) * len(alpha)
    phase = tuple(int(k) for k in phase)
    if len(phase) != len(alpha):
        raise ValueError(f'Phase {phase} does not have {len(alpha)} entries.')
    return phase


def _candidate_indices(phase: Tuple[int, ...], kappa0: Optional[Tuple[int, ...]], truncation_degree: int):
    """
    Indices ``gamma`` whose angular factor can be nonzero: ``gamma = phase``
    without an angular constraint, ``gamma = phase + m kappa0`` (``m = 0`` or
    odd) with one.
    """
    def admissible(gamma):
        return min(gamma) >= 0 and max(gamma) <= truncation_degree

    if kappa0 is None:
        return [phase] if admissible(phase) else []
    j0 = next(j for j, k in enumerate(kappa0) if k)
    bounds = sorted(((0 - phase[j0]) / kappa0[j0], (truncation_degree - phase[j0]) / kappa0[j0]))
    candidates = []
    for m in range(math.floor(bounds[0]), math.ceil(bounds[1]) + 1):
        if m != 0 and m % 2 == 0:
            continue
        gamma = tuple(p + m * k for p, k in zip(phase, kappa0))
        if admissible(gamma):
            candidates.append(gamma)
    return sorted(candidates)


def project_weighted_indicator(alpha: Sequence, F: ReinhardtAngularSet, truncation_degree: int,
                               phase: Optional[Sequence[int]] = None, tolerance: Optional[float] = None,
                               radius: float = DEFAULT_BOX_RADIUS,
                               support: Optional[set] = None) -> MonomialSeries:
    """
    Truncated series of ``P(rho_alpha e^{i phase . theta} 1_F)`` on the unit
    polydisc.

    Parameters
    ----------
    alpha : sequence
        Nonnegative exponent of the radial weight.
    F : ReinhardtAngularSet
        Radial region, optionally cut by one angular constraint.
    truncation_degree : int
        Only indices in ``[0, truncation_degree]^n`` are computed.
    phase : sequence of int, optional
        Character ``kappa_w`` of the weight; ``phase = alpha`` projects the
        holomorphic monomial ``z^alpha 1_F``.  Defaults to ``0``.
    tolerance : float, optional
        If given, the truncation is certified: the tail bound of
        :func:`series_tail_bound` on the polydisc of radius ``radius`` must not
        exceed ``tolerance``.
    support : set of tuple, optional
        Restrict the computed indices to this set.

    Returns
    -------
    MonomialSeries
        Indices whose angular factor vanishes exactly are absent.

    Raises
    ------
    TruncationTooSmall
        If the certified tail bound exceeds ``tolerance``.
    """
    alpha = exponent_vector(alpha)
    if len(alpha) != F.dimension:
        raise ValueError(f'Weight has {len(alpha)} entries, set has dimension {F.dimension}.')
    if any(a < 0 for a in alpha):
        raise DomainError(f'Weight exponents must be nonnegative, got {[str(a) for a in alpha]}.')
    if truncation_degree < 0:
        raise ValueError(f'truncation_degree must be nonnegative, got {truncation_degree}.')
    if tolerance is not None:
        bound = series_tail_bound(alpha, F, truncation_degree, radius)
        if bound > tolerance:
            raise TruncationTooSmall(f'Tail bound {bound:.3g} on radius {float(radius)} exceeds tolerance '
                                     f'{tolerance:.3g} at truncation {truncation_degree}.')
    n = F.dimension
    phase = _phase_vector(alpha, phase)
    normalization = math.pi ** -n
    terms = {}
    for gamma in _candidate_indices(phase, F.angular, truncation_degree):
        if support is not None and gamma not in support:
            continue
        kappa = [p - g for p, g in zip(phase, gamma)]
        if F.angular is None:
            angular = (2 * math.pi) ** n if not any(kappa) else 0j
        else:
            angular = angular_character_integral(kappa, F.angular)
        if angular == 0:
            continue
        d = tuple(g + a + 1 for g, a in zip(gamma, alpha))
        moment = radial_moment(F, d)
        terms[gamma] = math.prod(g + 1 for g in gamma) * normalization * moment * angular
    logger.debug('Projected weight %s on %s: %d terms.', [str(a) for a in alpha], F.to_dict(), len(terms))
    return MonomialSeries(terms, truncation_degree, n)


def project_polynomial(coefficients: Mapping[Tuple[int, ...], complex], region: ReinhardtAngularSet,
                       truncation_degree: int) -> MonomialSeries:
    """
    Series of ``P(p 1_region)`` for the polynomial ``p = sum c_delta z^delta``.
    """
    result = MonomialSeries({}, truncation_degree, region.dimension)
    for delta, value in coefficients.items():
        delta = tuple(int(d) for d in delta)
        if value == 0:
            continue
        result = result + value * project_weighted_indicator(delta, region, truncation_degree, phase=delta)
    return result


def _radius_limits(region: ReinhardtAngularSet) -> np.ndarray:
    # Upper bound of each |z_j| implied by single-coordinate constraints.
    limits = np.ones(region.dimension)
    for constraint in region.radial:
        support = constraint.support
        c = constraint.exponents
        if len(support) == 1 and constraint.relation == 'lt' and c[support[0]] > 0:
            j = support[0]
            limits[j] = min(limits[j], constraint.bound ** (1 / c[j]))
    return limits


def series_tail_bound(alpha: Sequence, region: ReinhardtAngularSet, truncation_degree: int,
                      radius: float = DEFAULT_BOX_RADIUS) -> float:
    """
    Certified bound of the discarded terms on ``{|z_j| <= radius}``.

    With ``R_j`` the largest ``|z_j|`` in ``region``,
    ``|a_gamma| <= (gamma + 1)^1 |region| R^{alpha + gamma} / pi^n``, so the
    tail is at most ``M (prod_j S_j - prod_j H_j)`` with
    ``S_j = 1 / (1 - x_j)^2``, ``H_j`` its partial sum up to the truncation
    and ``x_j = R_j radius``.  The difference is summed telescopically.
    """
    alpha = exponent_vector(alpha)
    radius = float(radius)
    if not 0 <= radius < 1:
        raise RangeError(f'radius must lie in [0, 1), got {radius}.')
    n = region.dimension
    R = _radius_limits(region)
    volume = math.pi ** n * float(np.prod(R ** 2))
    M = volume * float(np.prod(R ** np.array([float(a) for a in alpha]))) / math.pi ** n
    T = truncation_degree
    x = R * radius
    full = 1 / (1 - x) ** 2
    tail = x ** (T + 1) * ((T + 2) - (T + 1) * x) / (1 - x) ** 2
    partial = full - tail
    total = 0.
    for j in range(n):
        total += float(np.prod(partial[:j])) * tail[j] * float(np.prod(full[j + 1:]))
    return M * total


def check_counterexample_hypotheses(analysis: DomainAnalysis, b: Sequence[int]) -> Tuple[int, ...]:
    """
    Validate ``(analysis, b)`` for the construction of ``h_s``.

    The domain must be nontrivial with ``m >= 2``, the first two entries of
    ``1A`` must be maximal, and ``b`` must be a Gamma-invariant exponent with
    ``b_1 = b_2 = 1`` and ``b >= 1``.

    Raises
    ------
    TrivialDomainError
        If the domain is a polydisc.
    HypothesisViolated
        If any other condition fails.
    """
    if analysis.trivial:
        raise TrivialDomainError('The domain is a polydisc; there is no counterexample.')
    b = tuple(int(v) for v in b)
    n = analysis.dimension
    if len(b) != n:
        raise HypothesisViolated(f'b = {b} does not have {n} entries.')
    if analysis.m < 2:
        raise HypothesisViolated(f'm = {analysis.m} < 2.')
    top = max(analysis.ones_a)
    if analysis.ones_a[0] != top or analysis.ones_a[1] != top:
        raise HypothesisViolated(f'The first two entries of 1A = {analysis.ones_a} must be maximal.')
    if b[0] != 1 or b[1] != 1 or min(b) < 1:
        raise HypothesisViolated(f'b = {b} must satisfy b_1 = b_2 = 1 and b >= 1.')
    if not is_gamma_invariant(b, analysis):
        raise HypothesisViolated(f'z^b with b = {b} is not invariant under the deck group.')
    return b


def counterexample_direction(analysis: DomainAnalysis, b: Sequence[int]) -> Tuple[int, ...]:
    """``kappa0 = alpha - b + 1 = 1A - b``, the character cutting ``F_s``."""
    kappa0 = tuple(k - int(v) for k, v in zip(analysis.ones_a, b))
    if not any(kappa0):
        raise HypothesisViolated(f'1A - b vanishes for b = {tuple(b)}.')
    return kappa0


def counterexample_set(analysis: DomainAnalysis, b: Sequence[int], s: float) -> ReinhardtAngularSet:
    """
    ``F_s = {|z_1 z_2| < s, s <= |z_1| < sqrt(s), 0 <= Arg(z^{1A - b}) <= pi}``.

    ``F_s`` is invariant under the deck group because ``|z_1|``, ``|z_2|``
    and ``z^{1A - b}`` are.
    """
    if not 0 < s < .25:
        raise RangeError(f's must lie in (0, 1/4), got {s}.')
    region = shell_region(analysis.dimension, float(s))
    return ReinhardtAngularSet(region.dimension, region.radial, counterexample_direction(analysis, b))


def counterexample_support(analysis: DomainAnalysis, truncation_degree: int) -> set:
    """``{beta - 1 : beta Gamma-invariant, 1 <= beta_j <= truncation_degree + 1}``."""
    return {tuple(v - 1 for v in beta) for beta in gamma_invariant_lattice(analysis, truncation_degree + 1)}


def counterexample_series(analysis: DomainAnalysis, b: Sequence[int], s: float,
                          truncation_degree: int = DEFAULT_TRUNCATION) -> MonomialSeries:
    """
    Series of ``h_s = P(det phi' 1_{F_s}) = det A P(z^alpha 1_{F_s})`` with
    ``alpha = 1A - 1``.

    Only indices ``beta - 1`` with ``beta`` Gamma-invariant can appear.

    Raises
    ------
    HypothesisViolated
        If ``(analysis, b)`` does not satisfy the hypotheses checked by
        :func:`check_counterexample_hypotheses`.
    """
    b = check_counterexample_hypotheses(analysis, b)
    F = counterexample_set(analysis, b, s)
    alpha = analysis.alpha_cover
    series = project_weighted_indicator(alpha, F, truncation_degree, phase=alpha,
                                        support=counterexample_support(analysis, truncation_degree))
    logger.info('h_s at s = %.6g: %d nonzero terms up to degree %d.', s, len(series), truncation_degree)
    return analysis.det_a * series


def leading_coefficient(analysis: DomainAnalysis, b: Sequence[int], s: float) -> complex:
    """
    Closed form of ``a_{b-1}(s)``:

        (b)^1 det A s^{alpha_1 + 2} log(1/s) / (2 pi^n (alpha_1 + 2) prod_{j>2} (alpha_j + 1 + b_j))
        * int_B e^{i kappa0 . theta} dtheta.
    """
    b = check_counterexample_hypotheses(analysis, b)
    n = analysis.dimension
    alpha = analysis.alpha_cover
    kappa0 = counterexample_direction(analysis, b)
    angular = angular_character_integral(kappa0, kappa0)
    denominator = 2 * math.pi ** n * (alpha[0] + 2) * math.prod(alpha[j] + 1 + b[j] for j in range(2, n))
    return (math.prod(b) * analysis.det_a * s ** (alpha[0] + 2) * math.log(1 / s) / denominator) * angular


@dataclass(frozen=True)
class LowerBoundBox:
    """
    The box ``Pi = {|z_j - center_j| < radius}`` on which ``|h_s|`` is
    bounded from below.
    """
    center: Tuple[float, ...]
    radius: float

    @property
    def dimension(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        return (math.pi * self.radius ** 2) ** self.dimension

    def member(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return (np.abs(z - np.array(self.center)) < self.radius).all(axis=-1)

    def grid(self, points_per_axis: int = 5) -> np.ndarray:
        """
        Polar grid of the closed box: ``points_per_axis`` radii (including the
        center) times ``2 points_per_axis`` angles in each coordinate.
        """
        radii = self.radius * np.linspace(0., 1. - 1e-9, points_per_axis)
        angles = np.linspace(0., 2 * np.pi, 2 * points_per_axis, endpoint=False)
        offsets = np.unique(np.outer(radii, np.exp(1j * angles)).ravel())
        axes = [c + offsets for c in self.center]
        return np.array(list(itertools.product(*axes)), dtype=complex)


def lower_bound_box(analysis: DomainAnalysis, b: Sequence[int], radius: float = DEFAULT_BOX_RADIUS) -> LowerBoundBox:
    """
    ``Pi = D_r^2 x D``.  ``D`` is centered at ``0`` in the coordinates where
    ``b_j = 1`` and at ``1/2`` elsewhere, so that the ``b``-term of ``h_s``
    does not vanish at the center.
    """
    radius = float(radius)
    if not 0 < radius < .25:
        raise RangeError(f'radius must lie in (0, 1/4), got {radius}.')
    center = tuple(0. if j < 2 or int(v) == 1 else .5 for j, v in enumerate(b))
    return LowerBoundBox(center, radius)


def fit_lower_bound_constant(analysis: DomainAnalysis, b: Sequence[int], s: float,
                             truncation_degree: int = DEFAULT_TRUNCATION, radius: float = DEFAULT_BOX_RADIUS,
                             points_per_axis: int = 5,
                             series: Optional[MonomialSeries] = None) -> Tuple[float, LowerBoundBox]:
    """
    ``K = min_Pi |h_s| / (s^{alpha_1 + 2} log(1/s))`` over a polar grid of
    ``Pi``.

    Returns
    -------
    tuple
        ``(K, box)``.

    Raises
    ------
    HypothesisViolated
        If ``h_s`` vanishes somewhere on the grid.
    """
    box = lower_bound_box(analysis, b, radius)
    if series is None:
        series = counterexample_series(analysis, b, s, truncation_degree)
    values = np.abs(series(box.grid(points_per_axis)))
    scale = s ** (analysis.alpha_cover[0] + 2) * math.log(1 / s)
    K = float(values.min()) / scale
    if not K > 0:
        raise HypothesisViolated(f'h_s vanishes on the box centered at {box.center}.')
    logger.info('Lower bound constant K = %.6g fitted at s = %.6g.', K, s)
    return K, box


def bell_pullback_check(analysis: DomainAnalysis, E: ReinhardtAngularSet, z: np.ndarray,
                        truncation_degree: int) -> Tuple[complex, complex]:
    """
    Evaluate both sides of ``(P_U(1_E) o phi) det phi' = P_D(det phi' 1_{phi^{-1} E})``
    at ``z``.

    ``1_E`` is invariant under rotations, so it is orthogonal to every
    Laurent monomial ``w^beta`` with ``beta != 0`` and ``P_U(1_E)`` is the
    constant ``|E cap U| / |U|``.  The left side takes both volumes on the
    image side; the right side is the series of
    :func:`project_weighted_indicator` on the preimage, truncated at
    ``truncation_degree``.

    Raises
    ------
    UnsupportedSet
        If ``E`` carries an angular constraint.
    DomainError
        If ``z`` lies outside the open polydisc.
    """
    if not E.is_radial:
        raise UnsupportedSet('Only Reinhardt image-side sets have a Reinhardt preimage.')
    z = np.asarray(z, dtype=complex)
    n = analysis.dimension
    if z.shape != (n, ):
        raise ValueError(f'Expected a point with {n} coordinates.')
    if (np.abs(z) >= 1).any():
        raise DomainError('The check needs a point of the open polydisc.')
    covering = covering_map(analysis)
    U = domain_set(analysis)
    constant = set_volume(E.intersect(U)) / set_volume(U)
    lhs = det_phi_prime(covering, z) * constant

    rhs_series = analysis.det_a * project_weighted_indicator(analysis.alpha_cover, pullback_set(analysis, E),
                                                             truncation_degree, phase=analysis.alpha_cover)
    return complex(lhs), complex(rhs_series(z))
