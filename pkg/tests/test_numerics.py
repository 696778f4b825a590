import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import PHI_1
from ising_rg.errors import DomainError
from ising_rg.numerics import gauss_cdf, rank_to_spins, spin_rank, spin_table, xlogx


def _mp_cdf(x):
    with mpmath.workdps(40):
        return float(mpmath.ncdf(mpmath.mpf(x)))


@pytest.mark.parametrize("x,expected", [(0.0, 0.5), (1.0, PHI_1), (-1.0, 1.0 - PHI_1)])
def test_gauss_cdf_examples(x, expected):
    assert gauss_cdf(x) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("x", np.linspace(-8, 8, 33))
def test_gauss_cdf_matches_mpmath(x):
    assert abs(gauss_cdf(x) - _mp_cdf(x)) <= 1e-14


def test_gauss_cdf_lower_tail_relative_accuracy():
    assert gauss_cdf(-8.0) == pytest.approx(_mp_cdf(-8.0), rel=1e-13)


@given(st.floats(-40, 40, allow_nan=False))
def test_gauss_cdf_reflection(x):
    assert abs(gauss_cdf(x) + gauss_cdf(-x) - 1.0) <= 1e-15


def test_gauss_cdf_monotone_on_grid():
    xs = np.linspace(-8, 8, 2001)
    vals = gauss_cdf(xs)
    assert np.all(np.diff(vals) >= 0)
    # strict where 1 - Phi is still resolvable in double precision
    resolvable = xs[1:] <= 6.0
    assert np.all(np.diff(vals)[resolvable] > 0)


def test_gauss_cdf_array_matches_scalar():
    xs = np.array([-2.5, -0.3, 0.0, 0.7, 3.1])
    assert np.array_equal(gauss_cdf(xs), np.array([gauss_cdf(float(x)) for x in xs]))


@pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
def test_gauss_cdf_rejects_non_finite(bad):
    with pytest.raises(DomainError):
        gauss_cdf(bad)
    with pytest.raises(DomainError):
        gauss_cdf(np.array([0.0, bad]))


@pytest.mark.parametrize(
    "word,rank",
    [
        ((1, 1, 1, 1, 1, 1), 0),
        ((-1, 1, 1, 1, 1, 1), 1),
        ((1, 1, -1, 1, 1, 1), 4),
        ((-1,) * 6, 63),
    ],
)
def test_spin_rank_examples(word, rank):
    assert spin_rank(word) == rank


@pytest.mark.parametrize("rank,length,word", [(0, 6, (1,) * 6), (63, 6, (-1,) * 6), (5, 3, (-1, 1, -1))])
def test_rank_to_spins_examples(rank, length, word):
    assert rank_to_spins(rank, length) == word


@pytest.mark.parametrize("length", range(1, 13))
def test_round_trip_exhaustive(length):
    table = spin_table(length)
    for r in range(1 << length):
        word = rank_to_spins(r, length)
        assert spin_rank(word) == r
        assert tuple(table[r]) == word


def test_spin_rank_errors():
    with pytest.raises(DomainError):
        spin_rank([])
    with pytest.raises(DomainError):
        spin_rank([1, 0])
    with pytest.raises(DomainError):
        rank_to_spins(8, 3)
    with pytest.raises(DomainError):
        rank_to_spins(-1, 3)


def test_xlogx_convention():
    assert xlogx(0.0) == 0.0
    assert xlogx(1.0) == 0.0
    assert xlogx(2.0) == pytest.approx(2 * math.log(2))
