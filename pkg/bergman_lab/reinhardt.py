# coding: utf-8
"""
Reinhardt-type test sets of the unit polydisc.

A :class:`ReinhardtAngularSet` is the intersection of the open polydisc with
finitely many monomial modulus conditions ``rho_c(r) < bound`` (or ``>=``)
and at most one character-sign condition ``sin(kappa0 . theta) >= 0``.
"""
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from .core import DomainAnalysis, ExponentVector, LabError, exponent_vector, rational_to_dict

RELATIONS = ('lt', 'ge')

#: Rejection sampling gives up below this acceptance rate.
MIN_ACCEPTANCE = 1e-6


class SamplingError(LabError):
    pass


def _exponent_to_json(value: Fraction) -> Union[int, dict]:
    return value.numerator if value.denominator == 1 else rational_to_dict(value)


@dataclass(frozen=True)
class RadialConstraint:
    """
    Monomial modulus condition ``prod_j r_j^{c_j} <relation> bound``.
    """
    c: ExponentVector
    bound: float
    relation: str = 'lt'

    def __post_init__(self):
        object.__setattr__(self, 'c', exponent_vector(self.c))
        bound = self.bound
        if isinstance(bound, (list, tuple, dict)):
            bound = exponent_vector([bound])[0]
        object.__setattr__(self, 'bound', float(bound))
        if self.relation not in RELATIONS:
            raise ValueError(f'Relation must be one of {RELATIONS}, got {self.relation!r}.')
        if not self.bound > 0:
            raise ValueError(f'Constraint bound must be positive, got {self.bound}.')

    @property
    def exponents(self) -> np.ndarray:
        return np.array([float(v) for v in self.c])

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.exponents != 0)

    def log_values(self, log_r: np.ndarray) -> np.ndarray:
        """Return ``sum_j c_j log r_j``, treating ``0 * log 0`` as ``0``."""
        c = self.exponents
        with np.errstate(invalid='ignore'):
            terms = np.where(c == 0, 0., c * log_r)
        return terms.sum(axis=-1)

    def holds(self, log_r: np.ndarray) -> np.ndarray:
        values = self.log_values(log_r)
        log_bound = math.log(self.bound)
        with np.errstate(invalid='ignore'):
            if self.relation == 'lt':
                return values < log_bound
            return values >= log_bound

    def to_dict(self) -> dict:
        return {'c': [_exponent_to_json(v) for v in self.c], 'bound': self.bound, 'rel': self.relation}


@dataclass(frozen=True)
class ReinhardtAngularSet:
    """
    Subset of the unit polydisc described by radial monomial constraints and
    an optional angular constraint ``0 <= Arg(z^{kappa0}) <= pi``.

    With no constraints the set is the whole polydisc.
    """
    dimension: int
    radial: Tuple[RadialConstraint, ...] = ()
    angular: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, 'radial', tuple(self.radial))
        if self.dimension < 1:
            raise ValueError(f'Dimension must be positive, got {self.dimension}.')
        for constraint in self.radial:
            if len(constraint.c) != self.dimension:
                raise ValueError(f'Constraint {constraint.to_dict()} does not have {self.dimension} exponents.')
        if self.angular is not None:
            angular = tuple(int(k) for k in self.angular)
            if len(angular) != self.dimension:
                raise ValueError(f'Angular direction {angular} does not have {self.dimension} entries.')
            if not any(angular):
                raise ValueError('Angular direction kappa0 must be nonzero.')
            object.__setattr__(self, 'angular', angular)

    @property
    def is_radial(self) -> bool:
        return self.angular is None

    def member(self, z: np.ndarray) -> Union[bool, np.ndarray]:
        return member(self, z)

    def intersect(self, other: 'ReinhardtAngularSet') -> 'ReinhardtAngularSet':
        if other.dimension != self.dimension:
            raise ValueError('Cannot intersect sets of different dimension.')
        if self.angular is not None and other.angular is not None and self.angular != other.angular:
            raise ValueError('At most one angular constraint is supported.')
        return ReinhardtAngularSet(self.dimension, self.radial + other.radial,
                                   self.angular if self.angular is not None else other.angular)

    def radial_part(self) -> 'ReinhardtAngularSet':
        return ReinhardtAngularSet(self.dimension, self.radial)

    def to_dict(self) -> dict:
        data = {'dimension': self.dimension, 'radial': [c.to_dict() for c in self.radial]}
        if self.angular is not None:
            data['angular'] = {'kappa0': list(self.angular)}
        return data

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict, dimension: Optional[int] = None) -> 'ReinhardtAngularSet':
        """
        Build a set from its structured-text form::

            {"radial": [{"c": [...], "bound": ..., "rel": "lt" | "ge"}],
             "angular": {"kappa0": [...]}}

        ``dimension`` is only needed when it cannot be inferred from the data.
        """
        radial = tuple(RadialConstraint(c['c'], c['bound'], c.get('rel', 'lt')) for c in data.get('radial', []))
        angular = data.get('angular')
        kappa0 = None if angular is None else tuple(angular['kappa0'])
        n = data.get('dimension', dimension)
        if n is None:
            if radial:
                n = len(radial[0].c)
            elif kappa0 is not None:
                n = len(kappa0)
            else:
                raise ValueError('Set without constraints needs an explicit dimension.')
        return cls(int(n), radial, kappa0)


def member(region: ReinhardtAngularSet, z: np.ndarray) -> Union[bool, np.ndarray]:
    """
    Pointwise membership of ``z`` (one point, or one point per row) in
    ``region``.
    """
    z = np.asarray(z, dtype=complex)
    single = z.ndim == 1
    z = np.atleast_2d(z)
    if z.shape[-1] != region.dimension:
        raise ValueError(f'Expected points with {region.dimension} coordinates, got {z.shape[-1]}.')
    modulus = np.abs(z)
    inside = (modulus < 1).all(axis=-1)
    with np.errstate(divide='ignore'):
        log_r = np.log(modulus)
    for constraint in region.radial:
        inside &= constraint.holds(log_r)
    if region.angular is not None:
        theta = np.angle(z)
        inside &= np.sin(theta @ np.array(region.angular, dtype=float)) >= 0
    return bool(inside[0]) if single else inside


def polydisc(n: int) -> ReinhardtAngularSet:
    return ReinhardtAngularSet(n)


def sublevel_set(alpha: Sequence, s: float) -> ReinhardtAngularSet:
    """The set ``{z : rho_alpha(z) < s}``."""
    alpha = exponent_vector(alpha)
    return ReinhardtAngularSet(len(alpha), (RadialConstraint(alpha, s, 'lt'), ))


def box(radii: Sequence[float]) -> ReinhardtAngularSet:
    """The polydisc ``{|z_j| < radii[j]}``; radii ``>= 1`` add no constraint."""
    n = len(radii)
    constraints = []
    for j, radius in enumerate(radii):
        if radius < 1:
            c = [0] * n
            c[j] = 1
            constraints.append(RadialConstraint(c, radius, 'lt'))
    return ReinhardtAngularSet(n, tuple(constraints))


def shell_region(n: int, s: float) -> ReinhardtAngularSet:
    """
    Radial region ``A(s) = {r_1 r_2 < s, s <= r_1 < sqrt(s)}`` of the first
    two coordinates; the remaining coordinates are free.
    """
    if n < 2:
        raise ValueError('The shell region needs at least two coordinates.')
    product = [1, 1] + [0] * (n - 2)
    first = [1] + [0] * (n - 1)
    return ReinhardtAngularSet(n, (RadialConstraint(product, s, 'lt'),
                                   RadialConstraint(first, s, 'ge'),
                                   RadialConstraint(first, math.sqrt(s), 'lt')))


def domain_set(analysis: DomainAnalysis) -> ReinhardtAngularSet:
    """The monomial polyhedron ``U_B`` itself."""
    return ReinhardtAngularSet(analysis.dimension, tuple(RadialConstraint(row, 1, 'lt') for row in analysis.B))


def pullback_set(analysis: DomainAnalysis, region: ReinhardtAngularSet) -> ReinhardtAngularSet:
    """
    Preimage of an image-side set under ``phi(z) = z^A``.

    Since ``rho_c(z^A) = rho_{cA}(z)`` and ``Arg((z^A)^{kappa0}) = (kappa0 A) . theta``
    modulo ``2 pi``, every exponent row is multiplied by ``A``.  The
    constraints of ``U_B`` itself become conditions ``|z_j| < 1``.
    """
    n = analysis.dimension
    if region.dimension != n:
        raise ValueError(f'Set has dimension {region.dimension}, domain has dimension {n}.')
    A = analysis.A

    def times_a(row):
        return tuple(sum((Fraction(row[j]) * A[j][k] for j in range(n)), Fraction(0)) for k in range(n))

    radial = tuple(RadialConstraint(times_a(c.c), c.bound, c.relation) for c in region.radial)
    angular = None
    if region.angular is not None:
        angular = tuple(int(v) for v in times_a(region.angular))
    return ReinhardtAngularSet(n, radial, angular)


@dataclass(frozen=True)
class SampleBatch:
    """
    Uniform samples of a set, with the bookkeeping of the rejection step.

    ``superset_fraction`` is the exact probability of the proposal region
    under the uniform law of the polydisc.
    """
    points: np.ndarray
    proposals: int
    accepted: int
    superset_fraction: float

    @property
    def acceptance(self) -> float:
        return self.accepted / self.proposals if self.proposals else 0.

    @property
    def volume_estimate(self) -> float:
        n = self.points.shape[-1]
        return math.pi ** n * self.superset_fraction * self.acceptance


def _anchor(region: ReinhardtAngularSet):
    """
    Pick the nonnegative ``lt`` constraint whose enclosing Gamma tail has the
    smallest probability.

    In log-radius coordinates ``x_j = -log r_j`` (iid ``Exp(2)`` under the
    uniform law) the constraint reads ``c . x > L``; it implies
    ``sum_{j in supp c} x_j > L / max(c)``.
    """
    best = None
    for constraint in region.radial:
        c = constraint.exponents
        if constraint.relation != 'lt' or (c < 0).any() or not (c > 0).any() or constraint.bound >= 1:
            continue
        support = np.flatnonzero(c > 0)
        threshold = -math.log(constraint.bound) / c.max()
        mass = float(stats.gamma.sf(threshold, a=len(support), scale=.5))
        if best is None or mass < best[2]:
            best = (support, threshold, mass)
    return best


def _propose(n: int, size: int, anchor, rng: np.random.Generator) -> np.ndarray:
    x = rng.exponential(scale=.5, size=(size, n))
    if anchor is not None:
        support, threshold, mass = anchor
        tail = (1. - rng.random(size)) * mass
        totals = stats.gamma.isf(tail, a=len(support), scale=.5)
        split = rng.exponential(size=(size, len(support)))
        x[:, support] = totals[:, None] * split / split.sum(axis=1, keepdims=True)
    theta = 2 * np.pi * rng.random((size, n))
    return np.exp(-x) * np.exp(1j * theta)


def sample_uniform(region: ReinhardtAngularSet, size: int, rng: np.random.Generator,
                   batch_size: int = 1 << 16) -> SampleBatch:
    """
    Draw ``size`` points uniformly distributed on ``region``.

    The proposal is exact: the log-radii on the support of the anchoring
    constraint follow a Gamma law conditioned on its tail, split by a flat
    Dirichlet law, and the other coordinates are uniform on the disc.  The
    remaining constraints are enforced by rejection.

    Raises
    ------
    SamplingError
        If the acceptance rate falls below :data:`MIN_ACCEPTANCE`.
    """
    n = region.dimension
    anchor = _anchor(region)
    superset_fraction = 1. if anchor is None else anchor[2]
    if size <= 0:
        return SampleBatch(np.empty((0, n), dtype=complex), 0, 0, superset_fraction)
    if superset_fraction <= 0:
        raise SamplingError(f'Set {region.to_dict()} has no mass that can be sampled.')

    chunks = []
    accepted = 0
    proposals = 0
    acceptance = 1.
    while accepted < size:
        count = int(min(max(batch_size, 1.2 * (size - accepted) / max(acceptance, MIN_ACCEPTANCE)), 1 << 21))
        z = _propose(n, count, anchor, rng)
        keep = member(region, z)
        proposals += count
        accepted += int(keep.sum())
        chunks.append(z[keep])
        acceptance = accepted / proposals
        if accepted == 0 and proposals >= 16 / MIN_ACCEPTANCE:
            raise SamplingError(f'Acceptance below {MIN_ACCEPTANCE} for set {region.to_dict()}.')
    points = np.concatenate(chunks)[:size]
    return SampleBatch(points, proposals, accepted, superset_fraction)
