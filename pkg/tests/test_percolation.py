import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyperperc import oracles
from hyperperc.errg import exact_susceptibility
from hyperperc.graph import all_edges, edge_id, make_graph, neighbors
from hyperperc.percolation import (
    ClusterOverflowError,
    EstimateWithError,
    SampleSpec,
    cluster_sizes,
    edge_open,
    edge_open_array,
    estimate_chi,
    estimate_largest_cluster,
    estimate_long_connection,
    estimate_M,
    estimate_pi0,
    estimate_two_point_field,
    full_config_clusters,
    grow_cluster,
)


def test_edge_open_extremes(h23):
    ids = np.arange(18)
    assert not edge_open_array(SampleSpec(h23, 0.0, 1), ids).any()
    assert edge_open_array(SampleSpec(h23, 1.0, 1), ids).all()


def test_edge_open_frequency():
    g = make_graph(4, 50)
    ids = np.arange(10**6, dtype=np.int64) * 7
    frac = edge_open_array(SampleSpec(g, 0.3, 11), ids).mean()
    assert abs(frac - 0.3) < 3 * math.sqrt(0.3 * 0.7 / 1e6)


def test_edge_open_is_deterministic_and_coupled():
    g = make_graph(3, 10)
    ids = np.arange(5000)
    a = edge_open_array(SampleSpec(g, 0.2, 5, 3), ids)
    assert np.array_equal(a, edge_open_array(SampleSpec(g, 0.2, 5, 3), ids))
    b = edge_open_array(SampleSpec(g, 0.4, 5, 3), ids)
    assert np.all(b[a])  # open at 0.2 implies open at 0.4
    assert edge_open(SampleSpec(g, 0.2, 5, 3), 17) == bool(a[17])


@pytest.mark.parametrize("p", [-0.1, 1.1, float("nan")])
def test_invalid_p(h23, p):
    with pytest.raises(ValueError):
        SampleSpec(h23, p, 0)


def test_grow_cluster_trivial():
    g = make_graph(1, 3)
    c = grow_cluster(SampleSpec(g, 0.0, 0), 1)
    assert c.vertices == {1} and c.surplus == 0 and c.open_edges == 0
    c = grow_cluster(SampleSpec(g, 1.0, 0))
    assert c.vertices == {0, 1, 2} and c.open_edges == 3 and c.surplus == 1
    assert c.bridge_component_of_source == {0, 1, 2} and c.bridges == ()


def test_bridges_on_path():
    # H(1,2) at p = 1 is a single bridge
    c = grow_cluster(SampleSpec(make_graph(1, 2), 1.0, 0))
    assert c.bridge_component_of_source == {0}
    assert len(c.bridges) == 1


def test_grow_cluster_matches_union_find():
    g = make_graph(2, 10)
    for p in (0.05, 0.1, 0.2):
        for r in range(5):
            s = SampleSpec(g, p, 3, r)
            part = full_config_clusters(s)
            for src in np.random.default_rng(r).integers(0, g.V, 20):
                c = grow_cluster(s, int(src))
                members = set(part.cluster_of(int(src)).tolist())
                assert c.vertices == members
                root = part.labels[int(src)]
                k = int(np.searchsorted(part.roots, root))
                assert c.surplus == part.surplus[k]


def test_full_config_extremes(h23):
    part = full_config_clusters(SampleSpec(h23, 0.0, 0))
    assert len(part.sizes) == 9 and part.sizes.max() == 1
    assert part.largest_root == 0
    part = full_config_clusters(SampleSpec(h23, 1.0, 0))
    assert list(part.sizes) == [9]


def test_monotone_coupling_subset():
    g = make_graph(2, 12)
    for r in range(20):
        lo = grow_cluster(SampleSpec(g, 0.06, 9, r)).vertices
        hi = grow_cluster(SampleSpec(g, 0.09, 9, r)).vertices
        assert lo <= hi


def test_cluster_cap():
    g = make_graph(2, 30)
    with pytest.raises(ClusterOverflowError):
        grow_cluster(SampleSpec(g, 1.0, 0), cap=50)
    with pytest.raises(ClusterOverflowError):
        estimate_chi(g, 1.0, 4, 0, cap=50)


def test_estimate_chi_trivial(h23):
    e = estimate_chi(h23, 0.0, 10, 0)
    assert (e.mean, e.standard_error) == (1.0, 0.0)
    assert estimate_chi(h23, 1.0, 10, 0).mean == 9.0
    with pytest.raises(ValueError):
        estimate_chi(h23, 0.1, 1, 0)


def test_estimate_chi_vs_exact(k100):
    e = estimate_chi(k100, 0.005, 20000, 1)
    assert abs(e.z_against(exact_susceptibility(100, 0.005))) < 3


def test_cluster_sizes_agree_with_grow_cluster():
    g = make_graph(2, 6)
    sizes, edges = cluster_sizes(g, 0.2, 30, 4)
    for r in range(30):
        c = grow_cluster(SampleSpec(g, 0.2, 4, r))
        assert sizes[r] == c.size and edges[r] == c.open_edges


def test_two_point_field(h23):
    f = estimate_two_point_field(h23, 0.0, 10, 0)
    assert list(f.values) == [1.0] + [0.0] * 8
    assert np.all(estimate_two_point_field(h23, 1.0, 10, 0).values == 1.0)
    g = make_graph(2, 6)
    f = estimate_two_point_field(g, 0.15, 4000, 2)
    c = estimate_chi(g, 0.15, 4000, 2)
    assert f.values[0] == 1.0
    assert abs(f.chi - c.mean) < 1e-9  # same replicates


def test_two_point_matches_enumeration():
    g = make_graph(1, 5)
    exact = oracles.enumerate_two_point(g, 0.3)
    f = estimate_two_point_field(g, 0.3, 40000, 6)
    se = f.standard_errors()
    assert np.all(np.abs(f.values[1:] - exact[1:]) < 4 * se[1:])


def test_two_point_symmetry():
    g = make_graph(2, 5)
    f = estimate_two_point_field(g, 0.12, 20000, 8)
    se = f.standard_errors()
    # (1,2) and (2,1) are related by a coordinate swap; (1,0) and (3,0) by relabeling
    for a, b in [(1 + 2 * 5, 2 + 1 * 5), (1, 3), (5, 10)]:
        assert abs(f.values[a] - f.values[b]) < 4 * math.hypot(se[a], se[b])


def test_pi0():
    g = make_graph(1, 3)
    assert estimate_pi0(g, 0.0, 5, 0).mean == 0.0
    assert estimate_pi0(g, 1.0, 5, 0).mean == 2.0
    k6 = make_graph(1, 6)
    e = estimate_pi0(k6, 0.5, 20000, 3)
    assert abs(e.z_against(oracles.enumerate_pi0(k6, 0.5))) < 3


def test_largest_cluster():
    g = make_graph(2, 4)
    assert estimate_largest_cluster(g, 0.0, 3, 0).mean == 1.0
    assert estimate_largest_cluster(g, 1.0, 3, 0).mean == 16.0


@pytest.mark.slow
def test_largest_cluster_critical_scaling():
    n = 1000
    e = estimate_largest_cluster(make_graph(1, n), 1 / n, 200, 0)
    assert 0.3 <= e.mean / n ** (2 / 3) <= 6


def test_long_connection():
    g = make_graph(2, 5)
    assert estimate_long_connection(g, 0.3, g.V, 20, 0).mean == 0.0
    assert estimate_long_connection(g, 0.0, 0, 20, 0).mean == 0.0
    # at p = 1 every other vertex is within distance 2 of the origin
    assert estimate_long_connection(g, 1.0, 1, 5, 0).mean == 1.0
    assert estimate_long_connection(g, 1.0, 2, 5, 0).mean == 0.0
    with pytest.raises(ValueError):
        estimate_long_connection(g, 0.1, -1, 5, 0)


def test_long_connection_below_uniform_bound():
    from hyperperc.critpoint import solve_pc
    from hyperperc.randwalk import mixing_time
    g = make_graph(2, 8)
    pc = solve_pc(g, 1.0, budget=200_000, seed=1)
    r = mixing_time(2, 8, 1 / 8)
    e = estimate_long_connection(g, pc.p_hat, r, 20000, 2)
    chi = estimate_chi(g, pc.p_hat, 20000, 3).mean
    assert e.mean <= 2 * chi / g.V


def test_M_trivial_and_enumeration():
    g = make_graph(1, 6)
    assert estimate_M(g, 0.0, 10, 0).mean == 0.0
    e = estimate_M(g, 0.3, 40000, 1)
    assert abs(e.z_against(oracles.enumerate_M(g, 0.3))) < 3


def test_estimate_with_error():
    e = EstimateWithError.from_samples([1, 2, 3, 4])
    assert e.mean == 2.5 and e.replicates == 4
    assert math.isclose(e.standard_error, np.std([1, 2, 3, 4], ddof=1) / 2)
    assert e.z_against(2.5) == 0.0
    with pytest.raises(ValueError):
        EstimateWithError.from_samples([1.0])


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31), st.integers(0, 1000), st.floats(0.01, 0.3))
def test_growth_is_seed_deterministic(seed, rep, p):
    g = make_graph(2, 7)
    a = grow_cluster(SampleSpec(g, p, seed, rep))
    b = grow_cluster(SampleSpec(g, p, seed, rep))
    assert a == b
    # every internal open edge is open according to edge_open
    s = SampleSpec(g, p, seed, rep)
    inner = [(v, int(w)) for v in a.vertices for w in neighbors(g, v)
             if int(w) in a.vertices and v < int(w)]
    assert sum(edge_open(s, edge_id(g, v, w)) for v, w in inner) == a.open_edges
