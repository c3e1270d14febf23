import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyperperc.asymptotics import gw_mean_progeny
from hyperperc.errg import exact_moments, exact_susceptibility
from hyperperc.exploration import (
    bf_explore,
    brw_explore,
    brw_samples,
    check_coupling,
    estimate_gw_progeny,
    line_cluster,
    linewise_explore,
    sample_gw_progeny,
)
from hyperperc.graph import make_graph
from hyperperc.percolation import (
    ClusterOverflowError,
    EstimateWithError,
    SampleSpec,
    cluster_sizes,
    grow_cluster,
)


def test_bf_trivial(h23):
    t = bf_explore(SampleSpec(h23, 0.0, 0), 4)
    assert t.T == 1 and t.dead == {4} and not t.surplus_edges
    t = bf_explore(SampleSpec(make_graph(1, 3), 1.0, 0))
    assert t.T == 3 and len(t.surplus_edges) == 1


def test_bf_trace_invariants():
    g = make_graph(2, 8)
    for r in range(30):
        t = bf_explore(SampleSpec(g, 0.15, 1, r))
        assert list(t.dead_size_by_step) == list(range(1, t.T + 1))
        assert t.active_size_by_step[-1] == 0
        assert len(t.dead) == t.T


@pytest.mark.parametrize("d,n,p", [(2, 8, 0.1), (3, 6, 0.05), (1, 12, 0.15)])
def test_bf_and_linewise_match_grow_cluster(d, n, p):
    g = make_graph(d, n)
    for r in range(150):
        s = SampleSpec(g, p, 7, r)
        c = grow_cluster(s)
        b = bf_explore(s)
        lw = linewise_explore(s)
        assert b.dead == c.vertices and len(b.surplus_edges) == c.surplus
        assert lw.dead == c.vertices and lw.T == c.size
        # parent edges form a spanning tree of the cluster
        assert len(lw.parent_edges) == c.size - 1


def test_linewise_trivial():
    g = make_graph(3, 4)
    t = linewise_explore(SampleSpec(g, 0.0, 0), 5)
    assert t.dead == {5} and t.T == 1
    k = make_graph(1, 10)
    s = SampleSpec(k, 0.2, 3, 4)
    assert linewise_explore(s).dead == set(line_cluster(s, 0, 1))


def test_exploration_cap():
    g = make_graph(2, 10)
    with pytest.raises(ClusterOverflowError):
        bf_explore(SampleSpec(g, 1.0, 0), cap=20)
    with pytest.raises(ClusterOverflowError):
        linewise_explore(SampleSpec(g, 1.0, 0), cap=20)


def test_brw_trivial(h23):
    t = brw_explore(h23, 0.0, 0)
    assert (t.dead, t.ghosts_active, t.ghosts_dead) == (1, 0, 0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**9), st.floats(0.0, 0.3))
def test_brw_cumulative_dead(seed, p):
    g = make_graph(2, 6)
    b = brw_samples(g, p, 50, seed)
    assert np.all(b["cumulative_dead_sum"] == b["dead"] * (b["dead"] - 1) // 2)
    assert np.all(b["dead"] >= 1) and np.all(b["ghosts_active"] >= 0)
    assert np.all(b["cumulative_dead_adjacent"] <= b["cumulative_dead_sum"])


def test_brw_on_clique_adjacent_equals_all_dead(k100):
    b = brw_samples(k100, 0.008, 500, 3)
    assert np.array_equal(b["cumulative_dead_adjacent"], b["cumulative_dead_sum"])


def test_brw_replicates_match_batch(h23):
    b = brw_samples(h23, 0.3, 10, 4)
    for r in (0, 7):
        assert brw_explore(h23, 0.3, 4, r).dead == b["dead"][r]


def test_brw_mean_dead_vs_exact(k100):
    b = brw_samples(k100, 0.005, 100_000, 12)
    e = EstimateWithError.from_samples(b["dead"])
    assert abs(e.z_against(exact_susceptibility(100, 0.005))) < 3


def test_coupling_zero_p(h23):
    r = check_coupling(h23, 0.0, 100, 0)
    assert r.z_size == 0 and r.z_surplus == 0 and r.z_dead == 0


@pytest.mark.parametrize("n,lam", [(100, 0.5), (50, 0.8)])
def test_coupling_identities(n, lam):
    g = make_graph(1, n)
    p = lam / (n - 1)
    r = check_coupling(g, p, 100_000, 1)
    assert r.max_abs_z() < 3
    mo = exact_moments(n, p)
    assert abs(r.brw_dead.z_against(mo.chi)) < 3
    assert abs(r.brw_ghosts_active.z_against(mo.expected_surplus)) < 3


def test_coupling_on_hamming_graph():
    # the dead-ghost identity needs the adjacency-restricted dead count
    r = check_coupling(make_graph(2, 10), 0.04, 50_000, 2)
    assert r.max_abs_z() < 4


def test_gw_trivial():
    assert np.all(sample_gw_progeny(10, 0.0, 3, 0, reps=5) == 1)
    with pytest.raises(ValueError):
        sample_gw_progeny(1, 0.1, 2, 0)


def test_gw_mean_vs_formula():
    n, d, lam = 100, 2, 0.4
    p = lam / (n - 1)
    e = estimate_gw_progeny(n, p, d, 100_000, 5)
    want = 1 + d * (exact_susceptibility(n, p) - 1) / (1 - (d - 1) * (exact_susceptibility(n, p) - 1))
    assert abs(e.z_against(want)) < 3
    # 1 + d mu / (1 - (d-1) mu) equals chi_line / (1 - (d-1) mu)
    assert want == pytest.approx(gw_mean_progeny(exact_susceptibility(n, p), d), rel=1e-12)


def test_gw_dominates_cluster_size():
    n, d = 100, 2
    p = 0.4 / (n - 1)
    sizes, _ = cluster_sizes(make_graph(d, n), p, 20_000, 6)
    c = EstimateWithError.from_samples(sizes)
    z = estimate_gw_progeny(n, p, d, 20_000, 7)
    assert c.mean <= z.mean + 3 * np.hypot(c.standard_error, z.standard_error)


def test_gw_cap():
    with pytest.raises(ClusterOverflowError):
        sample_gw_progeny(50, 0.5, 3, 0, reps=3, cap=100)
