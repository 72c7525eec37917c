import math

import numpy as np

from granet.graph import Particle, Partition, build_contact_network


def graph_from_points(points, tolerance=1e-6, radius=0.5):
    ps = [Particle(i, tuple(float(v) for v in p), radius) for i, p in enumerate(points)]
    return build_contact_network(ps, tolerance)


def two_triangles():
    h = math.sqrt(3.0) / 2.0
    tri = [(0.0, 0.0), (1.0, 0.0), (0.5, h)]
    return graph_from_points(tri + [(x + 10.0, y) for x, y in tri])


def hex_flower():
    pts = [(0.0, 0.0)] + [(math.cos(math.pi * k / 3), math.sin(math.pi * k / 3)) for k in range(6)]
    return graph_from_points(pts)


def cycle_on_circle(n=9):
    """Unit-spaced cycle; returns the graph and a cutoff covering only adjacent nodes."""
    radius = 0.5 / math.sin(math.pi / n)
    pts = [(radius * math.cos(2 * math.pi * k / n), radius * math.sin(2 * math.pi * k / n)) for k in range(n)]
    second = 2.0 * radius * math.sin(2 * math.pi / n)
    return graph_from_points(pts), (1.0 + second) / 2.0


def random_geometric_graph(rng, n, dim=None, tolerance=0.35, density=0.8, min_edges=1):
    """Random unit-diameter particles in a box; regenerates until it has edges."""
    if dim is None:
        dim = int(rng.choice([2, 3]))
    side = (n / density) ** (1.0 / dim)
    while True:
        pts = rng.uniform(0.0, side, size=(n, dim))
        g = graph_from_points(pts, tolerance)
        if g.n_edges >= min_edges:
            return g


def random_partition(rng, n, max_q=None):
    max_q = max_q or max(1, n // 3)
    return Partition(rng.integers(0, int(rng.integers(1, max_q + 1)), size=n))
