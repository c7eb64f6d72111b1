import io
import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from graphs import complete, from_edges, path, star
from opgraph.errors import GraphError
from opgraph.graph import Graph
from opgraph.metrics import (
    average_path_length,
    degree_distribution,
    global_clustering,
    local_clustering,
    local_clustering_all,
    triangle_ratio,
    write_degree_distribution,
)
from opgraph.refmodels import gen_erdos_renyi


def test_clustering_anchors(k4, p4):
    assert global_clustering(k4) == 1.0
    assert global_clustering(p4) == 0.0
    assert local_clustering(star(3), 0) == 0.0


def test_clustering_counts_low_degree_nodes():
    # triangle 0-1-2 plus pendant 3 on node 0: LCC = [1/3, 1, 1, 0]
    g = from_edges(4, [(0, 1), (0, 2), (1, 2), (0, 3)])
    assert local_clustering_all(g).tolist() == pytest.approx([1 / 3, 1, 1, 0], rel=1e-15)
    assert global_clustering(g) == pytest.approx((1 / 3 + 2) / 4, rel=1e-15)


def test_clustering_empty_graph():
    with pytest.raises(GraphError):
        global_clustering(Graph(()))


@pytest.mark.parametrize("seed", range(20))
def test_local_clustering_matches_triples(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 12)
    edges = oracles.random_edges(n, 0.5, rng)
    g = from_edges(n, edges)
    expected = [oracles.local_clustering(n, edges, i) for i in range(n)]
    assert local_clustering_all(g) == pytest.approx(expected, rel=1e-12)
    assert [local_clustering(g, i) for i in range(n)] == pytest.approx(expected, rel=1e-12)
    assert global_clustering(g) == pytest.approx(sum(expected) / n, rel=1e-12)


def test_apl_anchors(k4, p4):
    assert average_path_length(k4) == 1.0
    assert average_path_length(p4) == pytest.approx(10 / 6, rel=1e-15)
    assert average_path_length(Graph([0])) == 0.0


@pytest.mark.parametrize("n", [2, 3, 5, 17, 64, 65, 130])
def test_apl_closed_forms(n):
    assert average_path_length(complete(n)) == 1.0
    assert average_path_length(path(n)) == pytest.approx((n + 1) / 3, rel=1e-14)


def test_apl_star():
    # leaves are 2 apart: (k*1 + C(k,2)*2) / C(k+1,2)
    k = 9
    assert average_path_length(star(k)) == pytest.approx((k + k * (k - 1)) / math.comb(k + 1, 2))


def test_apl_disconnected():
    with pytest.raises(GraphError, match="connected"):
        average_path_length(from_edges(4, [(0, 1), (2, 3)]))


def test_apl_threshold_requires_sampling():
    g = path(50)
    with pytest.raises(GraphError, match="sample"):
        average_path_length(g, max_exact_nodes=10)
    exact = average_path_length(g)
    assert average_path_length(g, max_exact_nodes=10, sample=50) == exact
    approx = average_path_length(g, max_exact_nodes=10, sample=20, seed=4)
    assert approx == average_path_length(g, max_exact_nodes=10, sample=20, seed=4)
    assert 0.5 * exact < approx < 1.5 * exact


@pytest.mark.parametrize("seed", range(20))
def test_apl_matches_floyd_warshall(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 12)
    # a random spanning tree keeps it connected
    edges = {tuple(sorted((i, rng.randrange(i)))) for i in range(1, n)}
    edges |= oracles.random_edges(n, 0.2, rng)
    g = from_edges(n, edges)
    assert average_path_length(g) == pytest.approx(oracles.average_path_length(n, edges), rel=1e-12)


def test_triangle_ratio_anchors(k4):
    assert triangle_ratio(k4) == 1.0
    assert triangle_ratio(from_edges(5, [(0, 1), (1, 2), (1, 3), (3, 4)])) == 0.0
    with pytest.raises(GraphError):
        triangle_ratio(complete(2))


@pytest.mark.parametrize("seed", range(10))
def test_triangle_ratio_matches_brute_force(seed):
    rng = random.Random(seed)
    edges = oracles.random_edges(10, 0.5, rng)
    total, _ = oracles.triangles(10, edges)
    assert triangle_ratio(from_edges(10, edges)) == total / math.comb(10, 3)


@given(st.lists(st.tuples(st.integers(0, 7), st.integers(0, 7)).filter(lambda e: e[0] != e[1]),
                max_size=28))
def test_triangle_ratio_monotone_under_edge_addition(edge_seq):
    edges = set()
    prev = 0.0
    for e in edge_seq:
        edges.add(tuple(sorted(e)))
        cur = triangle_ratio(from_edges(8, edges))
        assert cur >= prev
        prev = cur
    assert triangle_ratio(complete(8)) == 1.0


@given(st.integers(1, 12), st.randoms(use_true_random=False))
def test_local_clustering_bounds(n, rnd):
    g = from_edges(n, oracles.random_edges(n, 0.5, rnd))
    lcc = local_clustering_all(g)
    assert ((lcc >= 0) & (lcc <= 1)).all()
    assert global_clustering(g) == pytest.approx(lcc.mean(), rel=1e-12, abs=1e-15)


def test_degree_distribution_anchors(k4):
    assert degree_distribution(k4) == {3: 4}
    assert degree_distribution(star(3)) == {3: 1, 1: 3}
    assert degree_distribution(Graph(())) == {}


def test_degree_distribution_export():
    buf = io.StringIO()
    write_degree_distribution(degree_distribution(from_edges(5, [(0, 1), (0, 2), (0, 3)])), buf)
    assert buf.getvalue() == "degree,count\n0,1\n1,3\n3,1\n"


@given(st.integers(0, 12), st.randoms(use_true_random=False))
def test_degree_distribution_sums_to_n(n, rnd):
    g = from_edges(n, oracles.random_edges(n, 0.3, rnd))
    dist = degree_distribution(g)
    assert sum(dist.values()) == n
    assert sum(k * c for k, c in dist.items()) == 2 * g.edge_count


def test_er_clustering_law():
    n, m = 200, 600
    ccs = np.array([global_clustering(gen_erdos_renyi(n, m, seed)) for seed in range(50)])
    target = 2 * m / (n * (n - 1))
    se = ccs.std(ddof=1) / math.sqrt(len(ccs))
    assert abs(ccs.mean() - target) <= max(3 * se, 1e-12)
    assert abs(ccs.mean() - target) <= 0.02
