import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from byzrank.errors import ParameterError
from byzrank.graph import (ComparisonGraph, er_edge_probability, generate_er_graph, is_connected,
                           read_edge_list)


def reachability_connected(n, edges):
    # transitive closure by repeated squaring of (I + A)
    reach = np.eye(n, dtype=bool)
    for i, j in edges:
        reach[i, j] = reach[j, i] = True
    for _ in range(n):
        reach = (reach.astype(int) @ reach.astype(int)) > 0
    return bool(reach.all())


def test_full_probability_gives_complete_graph():
    g = generate_er_graph(4, 1.0, seed=123)
    assert g.num_edges == 6
    assert g.d_max == g.d_min == 3


def test_zero_probability_gives_empty_graph():
    g = generate_er_graph(10, 0.0, seed=5)
    assert g.num_edges == 0
    assert g.d_max == 0


def test_edge_count_matches_binomial():
    n = 200
    p = er_edge_probability(n, 20)
    assert p == pytest.approx(0.5298, abs=1e-4)
    pairs = n * (n - 1) // 2
    counts = np.array([generate_er_graph(n, p, seed=s).num_edges for s in range(100)])
    sd_of_mean = np.sqrt(pairs * p * (1 - p) / len(counts))
    assert abs(counts.mean() - pairs * p) <= 3 * sd_of_mean


def test_pair_inclusion_frequency():
    n, p, seeds = 8, 0.3, 400
    hits = np.zeros((n, n))
    for s in range(seeds):
        g = generate_er_graph(n, p, seed=s)
        for i, j in g.edges:
            hits[i, j] += 1
    freq = hits[np.triu_indices(n, k=1)] / seeds
    sigma = np.sqrt(p * (1 - p) / seeds)
    assert np.all(np.abs(freq - p) <= 4 * sigma)


def test_generation_is_reproducible():
    a = generate_er_graph(60, 0.2, seed=99)
    b = generate_er_graph(60, 0.2, seed=99)
    c = generate_er_graph(60, 0.2, seed=100)
    assert np.array_equal(a.edges, b.edges)
    assert not np.array_equal(a.edges, c.edges)


def test_degrees_match_edges():
    g = generate_er_graph(50, 0.3, seed=1)
    counts = np.bincount(g.edges.ravel(), minlength=50)
    assert np.array_equal(counts, g.degree)
    assert g.d_max == counts.max() and g.d_min == counts.min()
    for i in range(50):
        assert list(g.neighbors[i]) == sorted(g.neighbors[i])
        for j in g.neighbors[i]:
            assert g.has_edge(int(j), i)


@pytest.mark.parametrize("n,p", [(1, 0.5), (5, -0.1), (5, 1.5)])
def test_generation_rejects_bad_parameters(n, p):
    with pytest.raises(ParameterError):
        generate_er_graph(n, p, seed=0)


def test_from_edges_validation_and_dedup():
    g = ComparisonGraph.from_edges(3, [(1, 0), (0, 1), (2, 1)])
    assert g.edges.tolist() == [[0, 1], [1, 2]]
    with pytest.raises(ParameterError):
        ComparisonGraph.from_edges(3, [(1, 1)])
    with pytest.raises(ParameterError):
        ComparisonGraph.from_edges(3, [(0, 3)])


def test_small_connectivity_cases():
    assert is_connected(ComparisonGraph.complete(4))
    assert not is_connected(ComparisonGraph.from_edges(3, []))
    assert is_connected(ComparisonGraph.from_edges(3, [(0, 1), (1, 2)]))


@pytest.mark.parametrize("n", range(1, 7))
def test_connectivity_matches_reachability_exhaustively(n):
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(2 ** len(pairs)):
        edges = [pairs[b] for b in range(len(pairs)) if mask >> b & 1]
        g = ComparisonGraph.from_edges(n, edges)
        assert is_connected(g) == reachability_connected(n, edges)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 30), st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_relabel_preserves_degree_multiset(n, p, seed):
    g = generate_er_graph(n, p, seed)
    perm = np.random.default_rng(seed).permutation(n)
    h = g.relabel(perm)
    assert sorted(h.degree) == sorted(g.degree)
    assert is_connected(h) == is_connected(g)


def test_edge_list_round_trip(tmp_path):
    g = generate_er_graph(20, 0.3, seed=4)
    path = tmp_path / "edges.txt"
    g.write_edge_list(path)
    first = path.read_text().splitlines()[0].split()
    assert len(first) == 2
    assert np.array_equal(read_edge_list(path, 20).edges, g.edges)
