import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyperperc import oracles
from hyperperc.graph import make_graph
from hyperperc.randwalk import (
    MixingCapError,
    class_sizes,
    mixing_time,
    nbw_chain,
    nbw_distance_distribution,
    nbw_point_max,
    nbw_point_probabilities,
    srw_chain,
    srw_distance_distribution,
    srw_point_probabilities,
)

SMALL = [(2, 3), (2, 4), (3, 3), (1, 5)]


def test_class_sizes():
    assert list(class_sizes(2, 3)) == [1, 4, 4]
    assert class_sizes(3, 5).sum() == 125


def test_srw_examples():
    assert list(srw_distance_distribution(2, 3, 0)) == [1.0, 0.0, 0.0]
    assert list(srw_distance_distribution(2, 3, 1)) == [0.0, 1.0, 0.0]
    with pytest.raises(ValueError):
        srw_distance_distribution(2, 3, -1)


@pytest.mark.parametrize("d,n", SMALL)
def test_srw_matches_full_chain(d, n):
    g = make_graph(d, n)
    for t in range(7):
        want = oracles.srw_class_distribution(g, t)
        assert np.allclose(srw_distance_distribution(d, n, t), want, atol=1e-14)
    pts = srw_point_probabilities(d, n, 3)
    assert np.isclose((pts * class_sizes(d, n)).sum(), 1.0)


def test_srw_chain_is_stochastic():
    P = srw_chain(3, 5).matrix
    assert np.allclose(P.sum(axis=1), 1.0)


@pytest.mark.parametrize("d,n", SMALL)
def test_nbw_matches_directed_edge_chain(d, n):
    g = make_graph(d, n)
    for t in range(11):
        want = oracles.nbw_class_distribution(g, t)
        assert np.allclose(nbw_distance_distribution(d, n, t), want, atol=1e-14)


def test_nbw_point_examples():
    for d, n in [(2, 3), (3, 7)]:
        m = d * (n - 1)
        assert nbw_point_max(d, n, 1) == pytest.approx(1 / m)
    # K_n: the walker cannot be back at the start after two steps
    assert nbw_distance_distribution(1, 5, 2)[0] == 0.0
    with pytest.raises(ValueError):
        nbw_point_max(2, 3, 0)
    with pytest.raises(ValueError):
        nbw_chain(1, 2)


def test_nbw_point_max_matches_full():
    g = make_graph(2, 3)
    for t in range(1, 7):
        assert nbw_point_max(2, 3, t) == pytest.approx(oracles.nbw_point_matrix(g, t).max(),
                                                       abs=1e-14)
    pts = nbw_point_probabilities(2, 3, 4)
    assert np.isclose((pts * class_sizes(2, 3)).sum(), 1.0)


def test_nbw_states():
    ch = nbw_chain(2, 3)
    assert np.allclose(ch.matrix.sum(axis=1), 1.0)
    assert ch.index(1, 2) in range(len(ch.states))


@pytest.mark.parametrize("d,n,alpha", [(2, 3, 1 / 3), (2, 4, 0.25), (3, 3, 0.05), (2, 5, 0.1)])
def test_mixing_time_vs_oracle(d, n, alpha):
    assert mixing_time(d, n, alpha) == oracles.nbw_mixing_time(make_graph(d, n), alpha)


def test_mixing_time_examples():
    assert mixing_time(2, 3, 1 / 3) == 4
    g_v, m = 9, 4
    assert mixing_time(2, 3, g_v - 1) == 1  # 1/m <= (1 + alpha)/V
    with pytest.raises(ValueError):
        mixing_time(2, 3, 0.0)


def test_mixing_cap():
    # the NBW on a triangle is periodic and never mixes
    with pytest.raises(MixingCapError):
        mixing_time(1, 3, 0.01, t_max=200)


def test_mixing_is_logarithmic():
    ratios = [mixing_time(2, n, 1 / n) / math.log(n) for n in range(10, 201)]
    assert max(ratios) <= 10


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.integers(3, 12), st.integers(0, 30))
def test_distributions_sum_to_one(d, n, t):
    assert math.isclose(srw_distance_distribution(d, n, t).sum(), 1.0, rel_tol=1e-12)
    assert math.isclose(nbw_distance_distribution(d, n, t).sum(), 1.0, rel_tol=1e-12)
    assert np.all(nbw_distance_distribution(d, n, t) >= -1e-15)
