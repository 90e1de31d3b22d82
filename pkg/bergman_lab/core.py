# coding: utf-8
"""
Exact invariants of monomial polyhedra.

A monomial polyhedron is the bounded domain

    U_B = {z in C^n : prod_k |z_k|^{b^j_k} < 1 for every row b^j of B}

defined by an ``n x n`` integer matrix ``B``.  Everything in this module is
computed with arbitrary precision integers and :class:`fractions.Fraction`;
no floating point value ever enters a :class:`DomainAnalysis`.
"""
import itertools
import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy as sp

from ._version import get_versions

__version__ = get_versions()['version']
del get_versions

logger = logging.getLogger(__name__)

__all__ = ['LabError', 'Singular', 'NotBounded', 'TrivialDomainError', 'PermutationSearchError',
           'IntegerMatrix', 'RationalMatrix', 'ExponentVector', 'DomainAnalysis',
           'as_integer_matrix', 'exponent_vector', 'determinant', 'adjugate', 'rational_inverse',
           'analyze_domain', 'is_gamma_invariant', 'gamma_invariant_lattice', 'deck_transformation',
           'analysis_summary', 'rational_to_dict', 'format_matrix', 'MAX_PERMUTATION_DIMENSION',
           '__version__']

IntegerMatrix = Tuple[Tuple[int, ...], ...]
RationalMatrix = Tuple[Tuple[Fraction, ...], ...]
ExponentVector = Tuple[Fraction, ...]

#: Largest dimension for which the row-permutation search is exhaustive.
MAX_PERMUTATION_DIMENSION = 8


class LabError(Exception):
    pass


class Singular(LabError, ValueError):
    pass


class NotBounded(LabError, ValueError):
    pass


class TrivialDomainError(NotBounded):
    """Raised when an estimate is requested on a domain that is a polydisc."""
    pass


class PermutationSearchError(LabError):
    pass


def format_matrix(matrix: Sequence[Sequence]) -> str:
    return '[' + ', '.join('[' + ', '.join(str(v) for v in row) + ']' for row in matrix) + ']'


def as_integer_matrix(rows: Sequence[Sequence[int]]) -> IntegerMatrix:
    """
    Validate ``rows`` as a square integer matrix of dimension at least 2.

    Raises
    ------
    ValueError
        If the rows are ragged, not square, smaller than ``2 x 2``, or contain
        anything other than integers.
    """
    matrix = tuple(tuple(row) for row in rows)
    n = len(matrix)
    if n < 2:
        raise ValueError(f'Matrix must be at least 2x2, got {n} row(s).')
    for i, row in enumerate(matrix):
        if len(row) != n:
            raise ValueError(f'Matrix must be square: row {i} has {len(row)} entries, expected {n}.')
        for j, value in enumerate(row):
            if isinstance(value, bool) or not isinstance(value, (int, np.integer, sp.Integer)):
                raise ValueError(f'Entry ({i}, {j}) = {value!r} is not an integer.')
    return tuple(tuple(int(v) for v in row) for row in matrix)


def _as_fraction(value) -> Fraction:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f'Rational pairs must have two entries, got {value!r}.')
        return Fraction(int(value[0]), int(value[1]))
    if isinstance(value, dict):
        return Fraction(int(value['num']), int(value['den']))
    if isinstance(value, sp.Rational):
        return Fraction(int(value.p), int(value.q))
    if isinstance(value, np.integer):
        return Fraction(int(value))
    return Fraction(value)


def exponent_vector(values: Sequence) -> ExponentVector:
    """
    Convert ``values`` to an exact exponent vector.

    Entries may be integers, :class:`~fractions.Fraction` instances, strings
    such as ``'1/2'``, ``[num, den]`` pairs, ``{"num": ..., "den": ...}``
    mappings or floats (taken at their exact binary value).
    """
    return tuple(_as_fraction(v) for v in values)


def rational_to_dict(value: Fraction) -> Dict[str, int]:
    value = Fraction(value)
    return {'num': value.numerator, 'den': value.denominator}


def _to_sympy(matrix: Sequence[Sequence]) -> sp.Matrix:
    return sp.Matrix([[sp.Rational(Fraction(v).numerator, Fraction(v).denominator) for v in row]
                      for row in matrix])


def determinant(matrix: Sequence[Sequence[int]]) -> int:
    return int(_to_sympy(matrix).det(method='bareiss'))


def adjugate(matrix: Sequence[Sequence[int]]) -> IntegerMatrix:
    """
    Return the adjugate (transposed cofactor matrix) of a square integer
    matrix, so that ``M * adjugate(M) == det(M) * I`` exactly.
    """
    adj = _to_sympy(matrix).adjugate(method='bareiss')
    return tuple(tuple(int(adj[i, j]) for j in range(adj.cols)) for i in range(adj.rows))


def rational_inverse(matrix: Sequence[Sequence]) -> RationalMatrix:
    """
    Exact inverse of an invertible integer or rational matrix.

    Raises
    ------
    Singular
        If the determinant is zero.
    """
    M = _to_sympy(matrix)
    det = M.det(method='bareiss')
    if det == 0:
        raise Singular(f'Matrix {format_matrix(matrix)} is singular.')
    inverse = M.adjugate(method='bareiss') / det
    return tuple(tuple(_as_fraction(inverse[i, j]) for j in range(M.cols)) for i in range(M.rows))


def _permutation_sign(permutation: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(permutation)
    for start in range(len(permutation)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = permutation[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _is_permutation_matrix(matrix: IntegerMatrix) -> bool:
    n = len(matrix)
    rows_ok = all(sorted(row) == [0] * (n - 1) + [1] for row in matrix)
    cols_ok = all(sorted(col) == [0] * (n - 1) + [1] for col in zip(*matrix))
    return rows_ok and cols_ok


@dataclass(frozen=True)
class DomainAnalysis:
    """
    Exact invariants of a normalized monomial polyhedron.

    Attributes
    ----------
    B : IntegerMatrix
        Defining matrix with rows permuted so that ``det B > 0`` and
        ``B^{-1} >= 0`` entrywise.
    delta : IntegerMatrix
        Adjugate of ``B``.
    column_gcds : tuple of int
        Greatest common divisor of each column of ``delta``.
    A : IntegerMatrix
        Covering matrix: ``delta`` with every column divided by its gcd, so
        that ``delta = A * diag(column_gcds)``.
    C : RationalMatrix
        Exact inverse of ``A``.
    ones_a : tuple of int
        Column sums of ``A`` (the row vector ``1A``).
    m : int
        Number of maximal entries of ``ones_a``.
    p_star, q_star : Fraction
        Endpoints of the interval of boundedness; ``q_star`` is ``None`` for
        the polydisc, where ``p_star == 1``.
    weight_exponent : ExponentVector
        ``1 - 1A^{-1}``, the exponent of the weight ``w``.
    alpha_cover : tuple of int
        ``1A - 1``, the exponent of ``det phi'``.
    det_a : int
        Determinant of ``A``.
    degree : int
        ``|det A|``, the number of sheets of ``z -> z^A``.
    trivial : bool
        ``True`` iff ``A`` is a permutation matrix (the domain is a polydisc).
    permutation : tuple of int
        Row permutation applied to the input matrix.
    alternative_permutations : int
        How many other row permutations also qualify.
    """
    B: IntegerMatrix
    delta: IntegerMatrix
    column_gcds: Tuple[int, ...]
    A: IntegerMatrix
    C: RationalMatrix
    ones_a: Tuple[int, ...]
    m: int
    p_star: Fraction
    q_star: Optional[Fraction]
    weight_exponent: ExponentVector
    alpha_cover: Tuple[int, ...]
    det_a: int
    degree: int
    trivial: bool
    det_b: int
    permutation: Tuple[int, ...]
    alternative_permutations: int

    @property
    def dimension(self) -> int:
        return len(self.B)

    @cached_property
    def adjugate_a(self) -> np.ndarray:
        return np.array(adjugate(self.A), dtype=np.int64)

    def to_dict(self) -> dict:
        def rationals(values):
            return [rational_to_dict(v) for v in values]

        return {'B': [list(row) for row in self.B],
                'Delta': [list(row) for row in self.delta],
                'columnGcds': list(self.column_gcds),
                'A': [list(row) for row in self.A],
                'C': [rationals(row) for row in self.C],
                'onesA': list(self.ones_a),
                'm': self.m,
                'pStar': rational_to_dict(self.p_star),
                'qStar': None if self.q_star is None else rational_to_dict(self.q_star),
                'weightExponent': rationals(self.weight_exponent),
                'alphaCover': list(self.alpha_cover),
                'detA': self.det_a,
                'degree': self.degree,
                'trivial': self.trivial,
                'permutation': list(self.permutation),
                'alternativePermutations': self.alternative_permutations}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def analyze_domain(B: Sequence[Sequence[int]]) -> DomainAnalysis:
    """
    Compute every exact invariant of the monomial polyhedron defined by ``B``.

    Rows of ``B`` are permuted to the lexicographically first order for
    which ``det B > 0`` and every entry of ``B^{-1}`` is nonnegative.

    Parameters
    ----------
    B : sequence of sequence of int
        Square integer matrix, ``n >= 2``.

    Returns
    -------
    DomainAnalysis

    Raises
    ------
    Singular
        If ``det B == 0``.
    NotBounded
        If no row permutation yields ``det > 0`` with ``B^{-1} >= 0``.
    PermutationSearchError
        If ``n`` exceeds :data:`MAX_PERMUTATION_DIMENSION`.
    """
    B = as_integer_matrix(B)
    n = len(B)
    det_b = determinant(B)
    if det_b == 0:
        raise Singular(f'det B = 0 for B = {format_matrix(B)}')
    if n > MAX_PERMUTATION_DIMENSION:
        raise PermutationSearchError(f'Row permutation search is limited to n <= {MAX_PERMUTATION_DIMENSION} '
                                     f'(got n = {n}).')

    inverse = rational_inverse(B)
    qualifying = []
    for permutation in itertools.permutations(range(n)):
        if _permutation_sign(permutation) * det_b <= 0:
            continue
        # (PB)^{-1} = B^{-1} P^T, i.e., the columns of B^{-1} are permuted.
        if all(inverse[i][permutation[j]] >= 0 for i in range(n) for j in range(n)):
            qualifying.append(permutation)
    if not qualifying:
        raise NotBounded(f'No row permutation of B = {format_matrix(B)} has positive determinant and a '
                         'nonnegative inverse; B does not define a bounded monomial polyhedron.')

    permutation = qualifying[0]
    if len(qualifying) > 1:
        logger.debug('%d row permutations of B qualify; using %s.', len(qualifying), permutation)
    B_normal = tuple(B[i] for i in permutation)
    det_b = _permutation_sign(permutation) * det_b
    delta = adjugate(B_normal)
    column_gcds = tuple(gcd(*col) for col in zip(*delta))
    A = tuple(tuple(delta[i][j] // column_gcds[j] for j in range(n)) for i in range(n))
    C = rational_inverse(A)
    ones_a = tuple(sum(col) for col in zip(*A))
    largest = max(ones_a)
    m = ones_a.count(largest)
    p_star = max(Fraction(2 * k, k + 1) for k in ones_a)
    q_star = None if p_star == 1 else p_star / (p_star - 1)
    weight_exponent = tuple(1 - sum(col) for col in zip(*C))
    det_a = determinant(A)

    return DomainAnalysis(B=B_normal, delta=delta, column_gcds=column_gcds, A=A, C=C, ones_a=ones_a,
                          m=m, p_star=p_star, q_star=q_star, weight_exponent=weight_exponent,
                          alpha_cover=tuple(k - 1 for k in ones_a), det_a=det_a, degree=abs(det_a),
                          trivial=_is_permutation_matrix(A), det_b=det_b,
                          permutation=tuple(permutation),
                          alternative_permutations=len(qualifying) - 1)


def is_gamma_invariant(beta: Sequence[int], analysis: DomainAnalysis) -> bool:
    """
    Return ``True`` iff the monomial ``z^beta`` is invariant under the deck
    transformations of ``z -> z^A``, i.e., iff ``beta * A^{-1}`` is an
    integer row vector.
    """
    beta = [int(b) for b in beta]
    if len(beta) != analysis.dimension:
        raise ValueError(f'Expected {analysis.dimension} exponents, got {len(beta)}.')
    return all(sum(b * c_kj for b, c_kj in zip(beta, column)).denominator == 1
               for column in zip(*analysis.C))


def gamma_invariant_lattice(analysis: DomainAnalysis, max_degree: int) -> List[Tuple[int, ...]]:
    """
    List every invariant exponent ``beta`` with ``1 <= beta_j <= max_degree``.

    Uses the integer form of the test: ``beta * A^{-1}`` is integral iff
    ``beta * adj(A) = 0 (mod det A)``.

    Returns
    -------
    list of tuple of int
        Sorted lexicographically; empty when ``max_degree < 1``.
    """
    if max_degree < 0:
        raise ValueError(f'max_degree must be nonnegative, got {max_degree}.')
    n = analysis.dimension
    if max_degree < 1:
        return []
    grid = np.array(list(itertools.product(range(1, max_degree + 1), repeat=n)), dtype=np.int64)
    residues = (grid @ analysis.adjugate_a) % analysis.degree
    keep = (residues == 0).all(axis=1)
    return [tuple(int(v) for v in row) for row in grid[keep]]


def deck_transformation(analysis: DomainAnalysis, nu: Sequence[int]) -> Callable[[np.ndarray], np.ndarray]:
    """
    Return the rotation ``sigma_nu(z)_j = exp(2 pi i c^j . nu) z_j``, where
    ``c^j`` are the rows of ``C = A^{-1}``.

    Every ``sigma_nu`` satisfies ``sigma_nu(z)^A == z^A``.
    """
    nu = [int(v) for v in nu]
    phases = np.array([float(sum((c * v for c, v in zip(row, nu)), Fraction(0)) % 1) for row in analysis.C])
    rotation = np.exp(2j * np.pi * phases)

    def sigma(z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=complex) * rotation

    return sigma


def analysis_summary(analysis: DomainAnalysis) -> str:
    if analysis.trivial:
        return f'trivial polydisc: p* = {analysis.p_star}'
    return f'p* = {analysis.p_star}, q* = {analysis.q_star}, m = {analysis.m}'
