"""Contact networks of particle assemblies embedded in 2D/3D space."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from .errors import (
    DegenerateInputError,
    DimensionMismatchError,
    InsufficientNodesError,
    ValidationError,
)

DEFAULT_CONTACT_TOLERANCE = 1e-6
# Pairs whose distance is within this relative band of a cutoff count as "at"
# the cutoff; lattice second neighbours otherwise land on either side of it.
BOUNDARY_RTOL = 1e-9


@dataclass(frozen=True)
class Particle:
    id: int
    position: tuple
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValidationError(f"particle {self.id}: radius must be positive, got {self.radius}")
        if len(self.position) not in (2, 3):
            raise DimensionMismatchError(
                f"particle {self.id}: position must have 2 or 3 coordinates"
            )

    @property
    def dimension(self) -> int:
        return len(self.position)


def _norm(diff: np.ndarray) -> np.ndarray:
    """Euclidean norm along the last axis with a fixed summation order.

    Every distance in the package goes through here so that scalar and
    vectorised evaluations agree bit for bit.
    """
    sq = diff[..., 0] * diff[..., 0] + diff[..., 1] * diff[..., 1]
    if diff.shape[-1] == 3:
        sq = sq + diff[..., 2] * diff[..., 2]
    return np.sqrt(sq)


def strictly_inside(d, cutoff: float):
    """``d < cutoff`` with the boundary band treated as outside."""
    return d < cutoff * (1.0 - BOUNDARY_RTOL)


class SpatialGraph:
    """Immutable, unweighted-by-default contact network with node positions.

    ``edges`` is an ``(m, 2)`` array of node pairs with ``i < j``, sorted
    lexicographically.
    """

    def __init__(self, positions, edges, radii=None, weights=None, diameter=None):
        positions = np.array(positions, dtype=float)
        if positions.ndim != 2 or positions.shape[1] not in (2, 3):
            raise DimensionMismatchError("positions must be an (N, 2) or (N, 3) array")
        n = positions.shape[0]
        if n < 1:
            raise InsufficientNodesError("graph needs at least one node")
        if radii is None:
            radii = np.full(n, 0.5)
        radii = np.array(radii, dtype=float)

        edges = np.array(edges, dtype=np.int64).reshape(-1, 2)
        if len(edges):
            if np.any(edges[:, 0] == edges[:, 1]):
                raise ValidationError("self-loops are not allowed")
            if edges.min() < 0 or edges.max() >= n:
                raise ValidationError("edge endpoint out of range")
            edges = np.sort(edges, axis=1)
        order = np.lexsort((edges[:, 1], edges[:, 0]))
        edges = edges[order]
        if len(edges) > 1 and np.any(np.all(edges[1:] == edges[:-1], axis=1)):
            raise ValidationError("duplicate edges")

        if weights is None:
            weights = np.ones(len(edges))
        else:
            weights = np.array(weights, dtype=float)[order]
            if np.any(weights <= 0):
                raise ValidationError("edge weights must be positive")

        self.positions = positions
        self.radii = radii
        self.edges = edges
        self.edge_weights = weights
        self.degrees = np.bincount(edges.ravel(), minlength=n).astype(np.int64)
        self.strengths = np.bincount(edges.ravel(), weights=np.repeat(weights, 2), minlength=n)
        self.diameter = float(diameter) if diameter is not None else float(2.0 * radii.mean())

        adj = sparse.coo_matrix(
            (np.concatenate([weights, weights]),
             (np.concatenate([edges[:, 0], edges[:, 1]]), np.concatenate([edges[:, 1], edges[:, 0]]))),
            shape=(n, n),
        ).tocsr()
        adj.sort_indices()
        self.adjacency = adj
        for arr in (self.positions, self.radii, self.edges, self.edge_weights, self.degrees, self.strengths):
            arr.flags.writeable = False
        self._tree = None

    @property
    def n_nodes(self) -> int:
        return self.positions.shape[0]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def dimension(self) -> int:
        return self.positions.shape[1]

    @property
    def tree(self) -> cKDTree:
        if self._tree is None:
            self._tree = cKDTree(self.positions)
        return self._tree

    def _check(self, i):
        if not 0 <= i < self.n_nodes:
            raise IndexError(f"node {i} out of range [0, {self.n_nodes})")

    def neighbors(self, i: int) -> np.ndarray:
        self._check(i)
        a = self.adjacency
        return a.indices[a.indptr[i]:a.indptr[i + 1]]

    def has_edge(self, i: int, j: int) -> bool:
        self._check(i)
        self._check(j)
        nbrs = self.neighbors(i)
        k = np.searchsorted(nbrs, j)
        return bool(k < len(nbrs) and nbrs[k] == j)

    def weight(self, i: int, j: int) -> float:
        return float(self.adjacency[i, j])

    def distance(self, i: int, j: int) -> float:
        return pairwise_distance(self, i, j)

    def distances_from(self, i: int) -> np.ndarray:
        """Distances from node ``i`` to every node (including itself)."""
        self._check(i)
        return _norm(self.positions - self.positions[i])

    def pairs_within(self, radius: float):
        """Unordered pairs ``i < j`` with distance strictly below ``radius``.

        Returns ``(i, j, d)`` arrays sorted by ``(i, j)``.
        """
        if self.n_nodes < 2 or radius <= 0:
            empty = np.empty(0, dtype=np.int64)
            return empty, empty, np.empty(0)
        pairs = self.tree.query_pairs(radius, output_type="ndarray")
        if len(pairs) == 0:
            empty = np.empty(0, dtype=np.int64)
            return empty, empty, np.empty(0)
        pairs = np.sort(pairs.astype(np.int64), axis=1)
        pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
        d = _norm(self.positions[pairs[:, 1]] - self.positions[pairs[:, 0]])
        keep = d < radius
        return pairs[keep, 0], pairs[keep, 1], d[keep]

    def edge_distances(self) -> np.ndarray:
        e = self.edges
        return _norm(self.positions[e[:, 1]] - self.positions[e[:, 0]])

    def write_edgelist(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for (i, j), w in zip(self.edges, self.edge_weights):
                fh.write(f"{i} {j} {w:.17g}\n")

    def __repr__(self):
        return f"SpatialGraph(n_nodes={self.n_nodes}, n_edges={self.n_edges}, dimension={self.dimension})"


def build_contact_network(particles, contact_tolerance: float = DEFAULT_CONTACT_TOLERANCE) -> SpatialGraph:
    """Link every pair of particles whose surfaces are within ``contact_tolerance``."""
    if len(particles) < 1:
        raise InsufficientNodesError("need at least one particle")
    if contact_tolerance < 0:
        raise ValidationError("contact tolerance must be non-negative")
    dims = {p.dimension for p in particles}
    if len(dims) != 1:
        raise DimensionMismatchError(f"particles have mixed dimensions {sorted(dims)}")
    ids = sorted(p.id for p in particles)
    if ids != list(range(len(particles))):
        raise ValidationError("particle ids must form the contiguous range [0, N)")

    by_id = sorted(particles, key=lambda p: p.id)
    pos = np.array([p.position for p in by_id], dtype=float)
    radii = np.array([p.radius for p in by_id], dtype=float)
    n = len(by_id)
    if n == 1:
        return SpatialGraph(pos, np.empty((0, 2), dtype=np.int64), radii)

    tree = cKDTree(pos)
    dup = tree.query_pairs(0.0, output_type="ndarray")
    if len(dup):
        i, j = sorted(int(v) for v in dup[0])
        raise DegenerateInputError(f"particles {i} and {j} share a position")

    reach = 2.0 * radii.max() + contact_tolerance
    pairs = tree.query_pairs(reach, output_type="ndarray").astype(np.int64)
    if len(pairs):
        d = _norm(pos[pairs[:, 1]] - pos[pairs[:, 0]])
        touching = d <= radii[pairs[:, 0]] + radii[pairs[:, 1]] + contact_tolerance
        pairs = pairs[touching]
    return SpatialGraph(pos, pairs, radii)


def pairwise_distance(g: SpatialGraph, i: int, j: int) -> float:
    g._check(i)
    g._check(j)
    if i == j:
        return 0.0
    return float(_norm(g.positions[j] - g.positions[i]))


def neighbors_within(g: SpatialGraph, i: int, x_c: float) -> np.ndarray:
    """Nodes ``j != i`` strictly closer than ``x_c`` to node ``i``, ascending."""
    if not x_c > 0:
        raise ValueError("cutoff must be positive")
    g._check(i)
    cand = np.array(sorted(g.tree.query_ball_point(g.positions[i], x_c)), dtype=np.int64)
    cand = cand[cand != i]
    if len(cand) == 0:
        return cand
    d = _norm(g.positions[cand] - g.positions[i])
    return cand[strictly_inside(d, x_c)]


class Partition:
    """Node-to-community labelling with member bookkeeping.

    Community ids are opaque integers. Empty communities are never kept.
    """

    def __init__(self, labels):
        labels = np.array(labels, dtype=np.int64)
        if labels.ndim != 1:
            raise ValidationError("labels must be one-dimensional")
        self.labels = labels
        members: dict[int, list[int]] = {}
        for node, c in enumerate(labels.tolist()):
            members.setdefault(c, []).append(node)
        self.members = members

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(np.arange(n))

    @classmethod
    def from_communities(cls, communities, n: int | None = None) -> "Partition":
        if n is None:
            n = sum(len(c) for c in communities)
        labels = np.full(n, -1, dtype=np.int64)
        for cid, nodes in enumerate(communities):
            labels[list(nodes)] = cid
        if np.any(labels < 0):
            raise ValidationError("communities do not cover every node")
        return cls(labels)

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def q(self) -> int:
        return len(self.members)

    def community_of(self, node: int) -> int:
        return int(self.labels[node])

    def sizes(self) -> list[int]:
        return sorted((len(m) for m in self.members.values()), reverse=True)

    def copy(self) -> "Partition":
        p = Partition.__new__(Partition)
        p.labels = self.labels.copy()
        p.members = {c: list(m) for c, m in self.members.items()}
        return p

    def merge(self, source: int, target: int) -> None:
        """Move every member of ``source`` into ``target`` in place."""
        moved = self.members.pop(source)
        self.labels[moved] = target
        self.members[target].extend(moved)

    def merged(self, source: int, target: int) -> "Partition":
        p = self.copy()
        p.merge(source, target)
        return p

    def canonical(self) -> "Partition":
        """Relabel communities 0..q-1 by size (descending), then smallest member."""
        order = sorted(self.members.values(), key=lambda m: (-len(m), min(m)))
        return Partition.from_communities(order, self.n_nodes)

    def same_as(self, other: "Partition") -> bool:
        return np.array_equal(self.canonical().labels, other.canonical().labels)

    def __repr__(self):
        return f"Partition(n_nodes={self.n_nodes}, q={self.q})"


class DistanceBins:
    """Equal-width binning of all unordered node-pair distances.

    Only per-bin aggregates are stored; the bin of a given pair is recomputed
    on demand from its distance.
    """

    def __init__(self, bin_width, pair_counts, weight_sums, graph=None):
        self.bin_width = float(bin_width)
        self.graph = graph
        self.pair_counts = np.asarray(pair_counts, dtype=np.int64)
        # sum of W over unordered pairs; ordered-pair sums are twice this
        self.weight_sums = np.asarray(weight_sums, dtype=float)
        for arr in (self.pair_counts, self.weight_sums):
            arr.flags.writeable = False

    @property
    def n_bins(self) -> int:
        return len(self.pair_counts)

    def bin_index(self, d):
        return np.floor(np.asarray(d) / self.bin_width).astype(np.int64)

    def bin_of(self, g: SpatialGraph, i: int, j: int) -> int:
        if i == j:
            raise ValueError("pairs must have distinct nodes")
        return int(self.bin_index(pairwise_distance(g, i, j)))

    @property
    def active_bins(self) -> np.ndarray:
        """Bins holding some edge weight; all other bins have zero null terms."""
        return np.flatnonzero(self.weight_sums > 0)

    @property
    def support_radius(self) -> float:
        """Every pair in an active bin is strictly closer than this."""
        active = self.active_bins
        if len(active) == 0:
            return 0.0
        return (active.max() + 1) * self.bin_width


def bin_distances(g: SpatialGraph, bin_width: float) -> DistanceBins:
    if not bin_width > 0:
        raise ValueError("bin width must be positive")
    n = g.n_nodes
    if n < 2:
        raise InsufficientNodesError("binning needs at least two nodes")

    counts = np.zeros(1, dtype=np.int64)
    pos = g.positions
    # row by row keeps memory O(N) instead of materialising all pairs
    for i in range(n - 1):
        d = _norm(pos[i + 1:] - pos[i])
        c = np.bincount(np.floor(d / bin_width).astype(np.int64))
        if len(c) > len(counts):
            counts = np.pad(counts, (0, len(c) - len(counts)))
        counts[:len(c)] += c

    wsum = np.zeros(len(counts))
    if g.n_edges:
        eb = np.floor(g.edge_distances() / bin_width).astype(np.int64)
        # exact for unit weights; reals go through fsum per bin
        for b in np.unique(eb):
            wsum[b] = math.fsum(g.edge_weights[eb == b])
    return DistanceBins(bin_width, counts, wsum, g)
