import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from granet.errors import (
    DegenerateInputError,
    DimensionMismatchError,
    InsufficientNodesError,
    ValidationError,
)
from granet.graph import (
    Particle,
    Partition,
    SpatialGraph,
    bin_distances,
    build_contact_network,
    neighbors_within,
    pairwise_distance,
)
from helpers import graph_from_points, hex_flower, random_geometric_graph


def test_line_of_three_touching_disks():
    g = graph_from_points([(0, 0), (1, 0), (2, 0)], tolerance=1e-9)
    assert g.edges.tolist() == [[0, 1], [1, 2]]
    assert g.degrees.tolist() == [1, 2, 1]


def test_single_particle():
    g = build_contact_network([Particle(0, (0.0, 0.0), 0.5)])
    assert g.n_nodes == 1 and g.n_edges == 0


def test_flower_degrees_match_enumeration():
    g = hex_flower()
    expected = np.zeros(7, dtype=int)
    for i, j in itertools.combinations(range(7), 2):
        if math.dist(g.positions[i], g.positions[j]) <= 1.0 + 1e-6:
            expected[i] += 1
            expected[j] += 1
    assert g.degrees.tolist() == expected.tolist() == [6, 3, 3, 3, 3, 3, 3]


def test_mixed_dimensions_rejected():
    ps = [Particle(0, (0.0, 0.0), 0.5), Particle(1, (1.0, 0.0, 0.0), 0.5)]
    with pytest.raises(DimensionMismatchError):
        build_contact_network(ps)


def test_duplicate_positions_rejected():
    ps = [Particle(0, (0.0, 0.0), 0.5), Particle(1, (0.0, 0.0), 0.5)]
    with pytest.raises(DegenerateInputError):
        build_contact_network(ps)


def test_bad_particles():
    with pytest.raises(ValidationError):
        Particle(0, (0.0, 0.0), 0.0)
    with pytest.raises(ValidationError):
        build_contact_network([Particle(0, (0.0, 0.0), 0.5), Particle(2, (1.0, 0.0), 0.5)])
    with pytest.raises(ValidationError):
        build_contact_network([Particle(0, (0.0, 0.0), 0.5)], contact_tolerance=-1)


def test_graph_is_immutable():
    g = hex_flower()
    with pytest.raises(ValueError):
        g.degrees[0] = 1
    with pytest.raises(ValueError):
        g.positions[0, 0] = 1.0


@pytest.mark.parametrize(
    "a, b, expected",
    [((0.0, 0.0), (3.0, 4.0), 5.0), ((1.0, 1.0, 1.0), (2.0, 2.0, 2.0), math.sqrt(3.0))],
)
def test_pairwise_distance(a, b, expected):
    g = SpatialGraph([a, b], [])
    assert pairwise_distance(g, 0, 1) == pytest.approx(expected, rel=1e-15)
    assert pairwise_distance(g, 1, 0) == pairwise_distance(g, 0, 1)
    assert pairwise_distance(g, 0, 0) == 0.0
    with pytest.raises(IndexError):
        pairwise_distance(g, 0, 2)


def test_neighbors_within_flower():
    g = hex_flower()
    x_c = math.sqrt(3.0)
    assert neighbors_within(g, 0, x_c).tolist() == [1, 2, 3, 4, 5, 6]
    # ring node 1: centre and two ring neighbours at 1; ring nodes at sqrt(3) and 2 are out
    assert neighbors_within(g, 1, x_c).tolist() == [0, 2, 6]
    assert len(neighbors_within(g, 0, 0.5)) == 0


def test_neighbors_within_is_strict():
    g = SpatialGraph([(0.0, 0.0), (2.0, 0.0)], [])
    assert len(neighbors_within(g, 0, 2.0)) == 0
    assert neighbors_within(g, 0, 2.0001).tolist() == [1]


def test_bins_two_nodes():
    g = SpatialGraph([(0.0, 0.0), (1.5, 0.0)], [])
    bins = bin_distances(g, 1.0)
    assert bins.bin_of(g, 0, 1) == 1
    assert bins.pair_counts.tolist() == [0, 1]


def test_bins_equilateral_triangle():
    # apex nudged up one ulp; the rounded-down height gives sides of 1 - 1e-16 (bin 1)
    h = math.nextafter(math.sqrt(3.0) / 2.0, 1.0)
    g = graph_from_points([(0, 0), (1, 0), (0.5, h)])
    bins = bin_distances(g, 0.5)
    assert [bins.bin_of(g, i, j) for i, j in itertools.combinations(range(3), 2)] == [2, 2, 2]
    assert g.n_edges == 3
    assert bins.pair_counts.tolist() == [0, 0, 3]
    assert bins.weight_sums[2] == 3


def test_bins_path():
    g = graph_from_points([(0, 0), (1, 0), (2, 0)])
    bins = bin_distances(g, 1.1)
    assert bins.bin_of(g, 0, 1) == 0 and bins.bin_of(g, 1, 2) == 0 and bins.bin_of(g, 0, 2) == 1
    assert bins.weight_sums.tolist() == [2.0, 0.0]
    assert bins.pair_counts.tolist() == [2, 1]


def test_bins_need_two_nodes():
    with pytest.raises(InsufficientNodesError):
        bin_distances(SpatialGraph([(0.0, 0.0)], []), 0.5)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 40), width=st.floats(0.2, 2.0))
def test_graph_and_bin_invariants(seed, n, width):
    g = random_geometric_graph(np.random.default_rng(seed), n, min_edges=0)
    assert g.degrees.sum() == 2 * g.n_edges
    for i, j in g.edges.tolist():
        assert g.has_edge(i, j) and g.has_edge(j, i)
    bins = bin_distances(g, width)
    assert bins.pair_counts.sum() == n * (n - 1) // 2
    naive_counts = np.zeros(bins.n_bins, dtype=int)
    naive_w = np.zeros(bins.n_bins)
    for i, j in itertools.combinations(range(n), 2):
        b = math.floor(pairwise_distance(g, i, j) / width)
        naive_counts[b] += 1
        if g.has_edge(i, j):
            naive_w[b] += 1.0
    assert naive_counts.tolist() == bins.pair_counts.tolist()
    assert naive_w.tolist() == bins.weight_sums.tolist()


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 30), x_c=st.floats(0.1, 3.0))
def test_neighbors_within_agrees_with_distance(seed, n, x_c):
    g = random_geometric_graph(np.random.default_rng(seed), n, min_edges=0)
    for i in range(n):
        nbrs = set(neighbors_within(g, i, x_c).tolist())
        assert i not in nbrs
        for j in range(n):
            if j != i:
                assert (j in nbrs) == (pairwise_distance(g, i, j) < x_c)


def test_vectorised_and_scalar_distances_agree():
    g = random_geometric_graph(np.random.default_rng(3), 30, dim=3)
    for i in range(g.n_nodes):
        row = g.distances_from(i)
        for j in range(g.n_nodes):
            assert row[j] == pairwise_distance(g, i, j)


def test_partition_bookkeeping():
    p = Partition([5, 5, 2, 9, 2])
    assert p.q == 3
    assert sorted(p.members[5]) == [0, 1]
    p.merge(9, 2)
    assert p.q == 2 and 9 not in p.members
    assert p.labels.tolist() == [5, 5, 2, 2, 2]
    assert p.canonical().labels.tolist() == [1, 1, 0, 0, 0]
    assert p.same_as(Partition([7, 7, 1, 1, 1]))


def test_edgelist_export(tmp_path):
    g = hex_flower()
    path = tmp_path / "edges.txt"
    g.write_edgelist(path)
    rows = [tuple(map(float, line.split())) for line in path.read_text().splitlines()]
    assert len(rows) == g.n_edges
    assert [(int(a), int(b)) for a, b, _ in rows] == sorted((int(a), int(b)) for a, b, _ in rows)
    assert all(w == 1.0 for *_, w in rows)
