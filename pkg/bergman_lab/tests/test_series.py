# coding: utf-8
import numpy as np
import pytest

from bergman_lab.series import MonomialSeries, evaluate_series


def test_evaluate():
    constant = MonomialSeries({(0, 0): 2 - 1j}, 0, 2)
    assert constant(np.array([.3, .7j])) == 2 - 1j
    series = MonomialSeries({(0, 0): 1, (1, 1): 3}, 4, 2)
    assert evaluate_series(series, np.array([.5, .5])) == pytest.approx(1.75)
    values = series(np.array([[.5, .5], [0, .9], [.5j, .5j]]))
    assert values.tolist() == pytest.approx([1.75, 1, .25])
    assert MonomialSeries({}, 3, 2)(np.zeros((4, 2))).tolist() == [0] * 4


def test_evaluate_matches_direct_sum():
    rng = np.random.default_rng(7)
    terms = {tuple(rng.integers(0, 9, 3)): complex(*rng.normal(size=2)) for _ in range(40)}
    series = MonomialSeries(terms, 8, 3)
    z = .9 * rng.uniform(size=(50, 3)) * np.exp(2j * np.pi * rng.uniform(size=(50, 3)))
    direct = sum(value * np.prod(z ** np.array(gamma), axis=-1) for gamma, value in series.terms.items())
    assert np.allclose(series(z), direct, rtol=1e-12, atol=1e-14)


def test_arithmetic_and_validation():
    a = MonomialSeries({(0, 1): 1, (2, 0): 2j}, 2, 2)
    b = MonomialSeries({(0, 1): -1}, 3, 2)
    total = a + b
    assert total.truncation_degree == 3
    assert total.coefficient((0, 1)) == 0
    assert len(total.nonzero()) == 1
    assert (2 * a).coefficient([2, 0]) == 4j
    with pytest.raises(ValueError):
        MonomialSeries({(3, 0): 1}, 2, 2)
    with pytest.raises(ValueError):
        MonomialSeries({(1, 0, 0): 1}, 2, 2)
    with pytest.raises(ValueError):
        a(np.zeros(3))


def test_frame():
    series = MonomialSeries({(1, 0): .5 - .25j, (0, 0): 0, (0, 2): 1}, 2, 2)
    df = series.to_frame(drop_zeros=True)
    assert df.columns.tolist() == ['gamma_0', 'gamma_1', 're', 'im']
    assert df[['gamma_0', 'gamma_1']].values.tolist() == [[0, 2], [1, 0]]
    assert MonomialSeries.from_frame(df, 2) == series.nonzero()
    text = series.to_csv(drop_zeros=True)
    assert text.splitlines()[0] == 'gamma_0,gamma_1,re,im'
    assert text.splitlines()[2] == '1,0,0.5,-0.25'
