import numpy as np
import pytest

from granet.errors import OracleSizeError, UndefinedMetricError
from granet.graph import Partition, SpatialGraph
from granet.metrics import MetricKind, build_context, modularity
from granet.oracle import bell_number, exhaustive_best_partition, naive_modularity, restricted_growth_strings
from helpers import graph_from_points, random_geometric_graph, random_partition, two_triangles


@pytest.mark.parametrize("n, bell", [(0, 1), (1, 1), (2, 2), (3, 5), (4, 15), (6, 203), (8, 4140)])
def test_rgs_count_is_bell(n, bell):
    strings = list(restricted_growth_strings(n))
    assert len(strings) == bell == bell_number(n)
    assert len(set(strings)) == bell
    assert strings == sorted(strings)
    for s in strings:
        for k, v in enumerate(s):
            assert v <= max(s[:k], default=-1) + 1


def test_naive_two_triangles():
    g = two_triangles()
    assert naive_modularity(g, Partition([0, 0, 0, 1, 1, 1]), "ng") == pytest.approx(2 * (3 / 6 - (6 / 12) ** 2), abs=1e-15)
    assert naive_modularity(g, Partition([0] * 6), "ng") == pytest.approx(0.0, abs=1e-12)


def test_exhaustive_two_triangles():
    res = exhaustive_best_partition(two_triangles(), "ng")
    assert res.examined == 203
    assert res.q == pytest.approx(0.5, abs=1e-12)
    assert res.rgs == (0, 0, 0, 1, 1, 1)


def test_exhaustive_single_edge():
    g = graph_from_points([(0.0, 0.0), (1.0, 0.0)])
    res = exhaustive_best_partition(g, "ng")
    assert res.examined == 2 and res.rgs == (0, 0) and res.q == 0.0
    assert naive_modularity(g, Partition([0, 1]), "ng") == -0.5


def test_exhaustive_single_node():
    g = SpatialGraph([(0.0, 0.0)], [])
    assert list(restricted_growth_strings(1)) == [(0,)]
    with pytest.raises(UndefinedMetricError):
        exhaustive_best_partition(g, "ng")


def test_exhaustive_size_limit():
    g = random_geometric_graph(np.random.default_rng(0), 11)
    with pytest.raises(OracleSizeError):
        exhaustive_best_partition(g, "ng")


@pytest.mark.parametrize("kind", list(MetricKind))
def test_oracle_agrees_with_metrics(kind):
    rng = np.random.default_rng(list(MetricKind).index(kind))
    for _ in range(25):
        g = random_geometric_graph(rng, int(rng.integers(2, 35)))
        p = random_partition(rng, g.n_nodes)
        assert naive_modularity(g, p, kind) == pytest.approx(modularity(build_context(g, kind), p), abs=1e-12)


@pytest.mark.parametrize("kind", list(MetricKind))
def test_exhaustive_best_is_scored_consistently(kind):
    g = random_geometric_graph(np.random.default_rng(5), 6, dim=2)
    res = exhaustive_best_partition(g, kind)
    assert res.examined == bell_number(6)
    assert res.q == pytest.approx(naive_modularity(g, res.partition, kind), abs=1e-12)
