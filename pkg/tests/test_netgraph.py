import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import (apl_brute, betweenness_brute, clustering_brute, dense_transition,
                     pagerank_dense, random_digraph, spectral_radius_dense)
from mfelect import ingest, netgraph
from mfelect.errors import ConvergenceError, ParameterError
from mfelect.netgraph import InteractionGraph, PageRankParams, pagerank


def graph_of(edges, vertices=()):
    return InteractionGraph.from_edges(edges, vertices)


def rec(u, v, rt=0, tid=None):
    return ingest.record_from_dict({"tweet_id": tid or f"{u}-{v}-{rt}", "from_user_id": u,
                                    "to_user_id": v, "text": "x", "retweet_count": rt,
                                    "timestamp": "2020-09-01T00:00:00Z"})


def test_build_graph_rules():
    g = netgraph.build_graph([rec(1, 2), rec(1, 2, tid="dup"), rec(3, -1), rec(2, 1)])
    assert g.vertices == [1, 2, 3]
    assert g.edges == {(1, 2), (2, 1)}
    assert g.out_degree() == {1: 1, 2: 1, 3: 0}


def test_build_graph_weighted_variant():
    g = netgraph.build_graph([rec(1, 2, 5), rec(1, 2, 0, tid="b")], weighted=True)
    assert g.weights[(1, 2)] == 6.0
    assert netgraph.build_graph([rec(1, 2, 5)]).weights[(1, 2)] == 1.0


def test_no_interactions_edgeless():
    g = netgraph.build_graph([rec(1, -1), rec(2, -1)])
    assert g.n == 2 and not g.edges
    assert netgraph.spectral_radius(g) == 0.0
    s = pagerank(g)
    assert np.allclose(s.x, (1 - 0.85) / 2)


@pytest.mark.parametrize("seed", range(20))
def test_pagerank_matches_dense_solve(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 51))
    edges = random_digraph(rng, n, rng.uniform(0.1, 0.5))
    g = graph_of(edges, range(1, n + 1))
    p = dense_transition(n, edges, g.index)
    rho = spectral_radius_dense(p)
    assert netgraph.spectral_radius(g) == pytest.approx(rho, abs=1e-9)
    s = pagerank(g)
    oracle = pagerank_dense(p, 0.85, 0.15 / n)
    assert np.max(np.abs(s.x - oracle)) <= 1e-8
    # fixed-point residual reported and true
    direct = np.max(np.abs(s.x - (0.85 * s.x @ p + 0.15 / n)))
    assert direct <= 1e-10 and s.residual == pytest.approx(direct, abs=1e-15)


def test_spectral_radius_dangling_and_cycle():
    # a 3-cycle has rho = 1; a DAG has rho = 0
    assert netgraph.spectral_radius(graph_of([(1, 2), (2, 3), (3, 1)])) == pytest.approx(1.0)
    assert netgraph.spectral_radius(graph_of([(1, 2), (2, 3), (1, 3)])) == 0.0
    # cycle leaking mass: 1 <-> 2, 2 -> 3 (dangling)
    g = graph_of([(1, 2), (2, 1), (2, 3)])
    p = dense_transition(3, [(1, 2), (2, 1), (2, 3)], g.index)
    assert netgraph.spectral_radius(g) == pytest.approx(spectral_radius_dense(p), abs=1e-10)


def test_alpha_validation():
    cyc = graph_of([(1, 2), (2, 1)])  # rho = 1
    with pytest.raises(ParameterError):
        pagerank(cyc, PageRankParams(alpha=1.0, beta=0.1))
    with pytest.raises(ParameterError):
        pagerank(cyc, PageRankParams(alpha=-0.1))
    with pytest.raises(ParameterError):
        PageRankParams(beta=0.0)
    dag = graph_of([(1, 2)])
    # rho = 0: alpha up to the cap is allowed but needs a positive beta
    s = pagerank(dag, PageRankParams(alpha=1.0, beta=0.5))
    assert s[2] == pytest.approx(1.0) and s[1] == pytest.approx(0.5)
    with pytest.raises(ParameterError):
        pagerank(dag, PageRankParams(alpha=1.0))
    with pytest.raises(ParameterError):
        pagerank(dag, PageRankParams(alpha=1.5, beta=0.1))


def test_alpha_zero_gives_beta():
    g = graph_of([(1, 2), (2, 3), (3, 1)])
    s = pagerank(g, PageRankParams(alpha=0.0, beta=0.2))
    assert np.all(s.x == 0.2)


def test_pagerank_nonconvergence_reported():
    g = graph_of([(1, 2), (2, 3), (3, 1), (1, 3)])
    with pytest.raises(ConvergenceError) as exc:
        pagerank(g, PageRankParams(alpha=0.99, max_iterations=3))
    assert exc.value.iterations == 3 and exc.value.residual > 0


def test_pagerank_weighted_uses_weights():
    g = netgraph.build_graph([rec(1, 2, 9), rec(1, 3, 0), rec(2, 1), rec(3, 1)], weighted=True)
    s = pagerank(g, PageRankParams(weighted=True))
    assert s[2] > s[3]
    u = pagerank(netgraph.build_graph([rec(1, 2, 9), rec(1, 3, 0), rec(2, 1), rec(3, 1)]))
    assert u[2] == pytest.approx(u[3])


def test_top_k():
    scores = {1: 0.3, 2: 0.5, 3: 0.3}
    assert netgraph.top_k_by_centrality(scores, 2) == [2, 1]
    assert netgraph.top_k_by_centrality(scores, 0) == []
    assert netgraph.top_k_by_centrality(scores, 10) == [2, 1, 3]
    assert netgraph.top_k_by_centrality({5: 1.0, 2: 1.0, 9: 1.0}, 3) == [2, 5, 9]


@pytest.mark.parametrize("seed", range(50))
def test_topology_matches_brute_force(seed):
    rng = np.random.default_rng(1000 + seed)
    n = int(rng.integers(1, 13))
    edges = random_digraph(rng, n, rng.uniform(0.05, 0.5))
    g = graph_of(edges, range(1, n + 1))
    mean, pairs = apl_brute(n, edges, g.index)
    apl = netgraph.average_path_length(g)
    assert apl.pairs == pairs
    if mean is None:
        assert apl.mean is None
    else:
        assert abs(apl.mean - mean) <= 1e-10
    assert abs(netgraph.global_clustering(g) - clustering_brute(n, edges, g.index)) <= 1e-10
    bc = netgraph.vertex_betweenness(g)
    brute = betweenness_brute(n, edges, g.index)
    assert max(abs(bc[v] - brute[g.index[v]]) for v in g.vertices) <= 1e-10


def test_topology_small_cases():
    line = graph_of([(1, 2), (2, 3)])
    assert netgraph.average_path_length(line) == (4 / 3, 3)
    assert netgraph.vertex_betweenness(line) == {1: 0.0, 2: 1.0, 3: 0.0}
    tri = graph_of([(1, 2), (2, 3), (3, 1)])
    assert netgraph.global_clustering(tri) == 1.0
    assert netgraph.global_clustering(graph_of([(1, 2), (1, 3)])) == 0.0
    assert netgraph.average_path_length(graph_of([], [1, 2])).mean is None
    # two equal shortest paths 1->4 split the credit
    diamond = graph_of([(1, 2), (1, 3), (2, 4), (3, 4)])
    assert netgraph.vertex_betweenness(diamond) == {1: 0.0, 2: 0.5, 3: 0.5, 4: 0.0}


def test_sweep_blocks_agree(monkeypatch):
    rng = np.random.default_rng(7)
    edges = random_digraph(rng, 40, 0.08)
    g = graph_of(edges, range(1, 41))
    full = netgraph.path_statistics(g)
    monkeypatch.setattr(netgraph, "SWEEP_BLOCK", 3)
    small = netgraph.path_statistics(g)
    assert full[0] == small[0]
    assert all(math.isclose(full[1][v], small[1][v], abs_tol=1e-10) for v in g.vertices)


edges_st = st.lists(st.tuples(st.integers(1, 9), st.integers(1, 9)), max_size=30)


@given(edges_st, st.permutations(list(range(1, 10))))
def test_relabel_invariance(edges, perm):
    g = graph_of([(u, v) for u, v in edges if u != v], range(1, 10))
    mapping = {v: 100 + perm[i] for i, v in enumerate(range(1, 10))}
    h = g.relabel(mapping)
    s_g, s_h = pagerank(g), pagerank(h)
    b_g, b_h = netgraph.vertex_betweenness(g), netgraph.vertex_betweenness(h)
    for v in g.vertices:
        assert math.isclose(s_g[v], s_h[mapping[v]], abs_tol=1e-12)
        assert math.isclose(b_g[v], b_h[mapping[v]], abs_tol=1e-9)


@given(edges_st)
def test_isolated_vertex_keeps_clustering(edges):
    g = graph_of([(u, v) for u, v in edges if u != v], range(1, 10))
    h = graph_of([(u, v) for u, v in edges if u != v], range(1, 11))
    assert netgraph.global_clustering(g) == netgraph.global_clustering(h)


@given(edges_st)
def test_residual_bound_property(edges):
    g = graph_of([(u, v) for u, v in edges if u != v], range(1, 10))
    s = pagerank(g)
    p = g.transition().toarray()
    assert np.max(np.abs(s.x - (0.85 * s.x @ p + 0.15 / g.n))) <= 1e-10


def test_file_roundtrips(tmp_path):
    g = graph_of([(3, 1), (1, 2), (2, 3)])
    netgraph.write_edge_list(g, tmp_path / "e.tsv")
    assert (tmp_path / "e.tsv").read_text() == "1\t2\n2\t3\n3\t1\n"
    assert netgraph.read_edge_list(tmp_path / "e.tsv").edges == g.edges
    s = pagerank(g)
    netgraph.write_centrality_csv(s, tmp_path / "c.csv")
    assert netgraph.read_centrality_csv(tmp_path / "c.csv") == s.values
