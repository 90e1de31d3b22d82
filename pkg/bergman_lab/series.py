# coding: utf-8
from dataclasses import dataclass, field
from io import StringIO
from typing import Mapping, Optional, Tuple, Union

import numpy as np
import pandas as pd

#: Number of complex entries evaluated per block of points.
EVALUATION_BLOCK = 1 << 21


@dataclass(frozen=True)
class MonomialSeries:
    """
    Truncated power series ``sum_gamma a_gamma z^gamma`` on the polydisc.

    Attributes
    ----------
    terms : dict
        Maps nonnegative integer multi-indices to complex coefficients.
        Indices that are absent have coefficient exactly zero.
    truncation_degree : int
        Every stored index has all entries ``<= truncation_degree``.
    dimension : int
        Number of variables.
    """
    terms: Mapping[Tuple[int, ...], complex] = field(default_factory=dict)
    truncation_degree: int = 0
    dimension: int = 1

    def __post_init__(self):
        terms = {}
        for gamma, value in dict(self.terms).items():
            gamma = tuple(int(g) for g in gamma)
            if len(gamma) != self.dimension:
                raise ValueError(f'Index {gamma} does not have {self.dimension} entries.')
            if min(gamma) < 0 or max(gamma) > self.truncation_degree:
                raise ValueError(f'Index {gamma} is outside [0, {self.truncation_degree}]^{self.dimension}.')
            terms[gamma] = complex(value)
        object.__setattr__(self, 'terms', terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __call__(self, z: np.ndarray):
        return evaluate_series(self, z)

    def __add__(self, other: 'MonomialSeries') -> 'MonomialSeries':
        if other.dimension != self.dimension:
            raise ValueError('Cannot add series of different dimension.')
        terms = dict(self.terms)
        for gamma, value in other.terms.items():
            terms[gamma] = terms.get(gamma, 0j) + value
        return MonomialSeries(terms, max(self.truncation_degree, other.truncation_degree), self.dimension)

    def __mul__(self, scale: complex) -> 'MonomialSeries':
        return MonomialSeries({gamma: scale * value for gamma, value in self.terms.items()},
                              self.truncation_degree, self.dimension)

    __rmul__ = __mul__

    def coefficient(self, gamma) -> complex:
        return self.terms.get(tuple(int(g) for g in gamma), 0j)

    def nonzero(self) -> 'MonomialSeries':
        return MonomialSeries({gamma: value for gamma, value in self.terms.items() if value != 0},
                              self.truncation_degree, self.dimension)

    def to_frame(self, drop_zeros: bool = False) -> pd.DataFrame:
        """
        One row per stored index: columns ``gamma_0 ... gamma_{n-1}``, ``re``
        and ``im``, sorted lexicographically by index.
        """
        columns = [f'gamma_{j}' for j in range(self.dimension)]
        items = sorted((gamma, value) for gamma, value in self.terms.items() if value != 0 or not drop_zeros)
        df = pd.DataFrame([list(gamma) for gamma, _ in items], columns=columns, dtype='int64')
        df['re'] = np.array([value.real for _, value in items], dtype=float)
        df['im'] = np.array([value.imag for _, value in items], dtype=float)
        return df

    @classmethod
    def from_frame(cls, df: pd.DataFrame, truncation_degree: Optional[int] = None) -> 'MonomialSeries':
        columns = sorted((c for c in df.columns if c.startswith('gamma_')), key=lambda c: int(c.split('_')[1]))
        indices = df[columns].to_numpy(dtype=int)
        values = df['re'].to_numpy() + 1j * df['im'].to_numpy()
        if truncation_degree is None:
            truncation_degree = int(indices.max()) if len(indices) else 0
        return cls({tuple(row): value for row, value in zip(indices, values)}, truncation_degree, len(columns))

    def to_csv(self, path_or_buf=None, drop_zeros: bool = False) -> Optional[str]:
        output = StringIO() if path_or_buf is None else path_or_buf
        self.to_frame(drop_zeros=drop_zeros).to_csv(output, index=False, float_format='%.17g')
        if path_or_buf is None:
            return output.getvalue()


def evaluate_series(series: MonomialSeries, z: np.ndarray) -> Union[complex, np.ndarray]:
    """
    Evaluate ``sum_gamma a_gamma z^gamma`` at one point or at each row of
    ``z``, from per-coordinate tables of powers.  Zero coefficients are
    skipped.
    """
    z = np.asarray(z, dtype=complex)
    single = z.ndim == 1
    points = np.atleast_2d(z)
    if points.shape[-1] != series.dimension:
        raise ValueError(f'Expected points with {series.dimension} coordinates, got {points.shape[-1]}.')
    items = [(gamma, value) for gamma, value in series.terms.items() if value != 0]
    result = np.zeros(len(points), dtype=complex)
    if items:
        exponents = np.array([gamma for gamma, _ in items], dtype=int)
        coefficients = np.array([value for _, value in items], dtype=complex)
        top = int(exponents.max())
        block = max(1, EVALUATION_BLOCK // max(len(items), series.dimension * (top + 1)))
        for start in range(0, len(points), block):
            chunk = points[start:start + block]
            powers = np.ones(chunk.shape + (top + 1, ), dtype=complex)
            if top:
                powers[:, :, 1:] = np.cumprod(np.repeat(chunk[:, :, None], top, axis=2), axis=2)
            monomials = np.ones((len(chunk), len(items)), dtype=complex)
            for j in range(series.dimension):
                monomials *= powers[:, j, exponents[:, j]]
            result[start:start + block] = monomials @ coefficients
    return complex(result[0]) if single else result
