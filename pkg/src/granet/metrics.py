"""Modularity functions for spatially embedded networks.

Four quality functions share one evaluation contract:

* ``ng``        configuration null model, ``P_ij = k_i k_j / 2m``
* ``gravity``   ``P_ij = I_i I_j f(bin(d_ij))`` with an empirical deterrence f
* ``radiation`` symmetrised radiation flux rescaled per distance bin
* ``nature``    signed connected/missing-edge strengths gated by a cutoff

Each context reduces its metric to a sparse symmetric matrix ``B`` of pair
coefficients (zero diagonal) so that merging communities ``A`` and ``B``
changes Q by ``scale * sum_{i in A, j in B} B_ij`` (plus a rank-one degree
term for ``ng``). Gravity and radiation null terms vanish outside distance
bins that carry edge weight, so ``B`` only covers short-range pairs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import sparse

from .errors import (
    ConfigError,
    InvalidMergeError,
    UndefinedMetricError,
    UnsupportedDimensionError,
)
from .graph import (
    DistanceBins,
    Partition,
    SpatialGraph,
    _norm,
    bin_distances,
    neighbors_within,
    strictly_inside,
)

DEFAULT_BIN_WIDTH = 0.5  # in particle diameters


class MetricKind(str, enum.Enum):
    NG = "ng"
    GRAVITY = "gravity"
    RADIATION = "radiation"
    NATURE = "nature"

    @classmethod
    def parse(cls, value) -> "MetricKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError(
                f"unknown metric {value!r}; expected one of {', '.join(k.value for k in cls)}"
            ) from None


@dataclass(frozen=True)
class MetricConfig:
    """Numeric knobs shared by the metrics.

    ``bin_width`` and ``cutoff`` are absolute lengths; ``None`` means derive
    them from the graph's particle diameter.
    """

    bin_width: float | None = None
    cutoff: float | None = None
    radiation_form: str = "paper"

    def __post_init__(self):
        if self.radiation_form not in ("paper", "simini"):
            raise ConfigError(f"radiation form must be 'paper' or 'simini', got {self.radiation_form!r}")
        if self.bin_width is not None and not self.bin_width > 0:
            raise ConfigError("bin width must be positive")
        if self.cutoff is not None and not self.cutoff > 0:
            raise ConfigError("cutoff must be positive")

    def resolved_bin_width(self, g: SpatialGraph) -> float:
        return self.bin_width if self.bin_width is not None else DEFAULT_BIN_WIDTH * g.diameter

    def resolved_cutoff(self, g: SpatialGraph) -> float:
        return self.cutoff if self.cutoff is not None else cutoff_distance(g.dimension, g.diameter)

    def to_dict(self) -> dict:
        return asdict(self)


def cutoff_distance(dimension: int, diameter: float) -> float:
    """Second-neighbour distance of the densest packing: hexagonal (2D) or FCC (3D)."""
    if dimension == 2:
        return math.sqrt(3.0) * diameter
    if dimension == 3:
        return math.sqrt(2.0) * diameter
    raise UnsupportedDimensionError(f"no cutoff rule for dimension {dimension}")


def _fsum(values) -> float:
    return math.fsum(np.asarray(values, dtype=float).tolist())


def _require_edges(g: SpatialGraph):
    if g.n_edges == 0:
        raise UndefinedMetricError("modularity is undefined on a graph without edges (m = 0)")


def _sym_matrix(n, i, j, v) -> sparse.csr_matrix:
    """Symmetric CSR matrix from upper-triangle triplets, explicit zeros dropped."""
    keep = v != 0
    i, j, v = i[keep], j[keep], v[keep]
    mat = sparse.coo_matrix(
        (np.concatenate([v, v]), (np.concatenate([i, j]), np.concatenate([j, i]))), shape=(n, n)
    ).tocsr()
    mat.sort_indices()
    return mat


def _edge_values(g: SpatialGraph, i, j) -> np.ndarray:
    """A_ij (edge weight or 0) for each unordered pair ``(i[k], j[k])``."""
    if len(i) == 0:
        return np.empty(0)
    return np.asarray(g.adjacency[i, j]).ravel()


# ---------------------------------------------------------------- gravity

def deterrence_function(bins: DistanceBins, importance) -> np.ndarray:
    """Per-bin ratio of observed edge weight to summed importance products.

    Bins without edge weight, or with a zero denominator, get ``f = 0``.
    """
    g = bins.graph
    importance = np.asarray(importance, dtype=float)
    if np.any(importance < 0) or not np.any(importance > 0):
        raise ConfigError("importance must be non-negative and not all zero")
    f = np.zeros(bins.n_bins)
    active = bins.active_bins
    if len(active) == 0:
        return f
    i, j, d = g.pairs_within(bins.support_radius)
    b = bins.bin_index(d)
    inside = b < bins.n_bins
    i, j, b = i[inside], j[inside], b[inside]
    prod = importance[i] * importance[j]
    for k in active:
        # ordered-pair sums are twice the unordered ones; the ratio is unchanged
        denom = _fsum(prod[b == k])
        if denom > 0:
            f[k] = bins.weight_sums[k] / denom
    return f


# -------------------------------------------------------------- radiation

def _flux(t_i, n_i, n_j, r_ij, form):
    if form == "paper":
        denom = (n_i + r_ij) * (n_j + r_ij)
    else:
        denom = (n_i + r_ij) * (n_i + n_j + r_ij)
    num = t_i * n_i * n_j
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(denom > 0, num / np.where(denom > 0, denom, 1.0), 0.0)
    return out, denom <= 0


def radiation_flux(g: SpatialGraph, i: int, j: int, form: str = "paper", return_flag: bool = False):
    """Mean flux from ``i`` to ``j`` with population and commuters set to degree.

    ``r_ij`` sums the degrees of every other node strictly closer to ``i``
    than ``j`` is. ``form="simini"`` switches to the original radiation
    denominator ``(n_i + r)(n_i + n_j + r)``.
    """
    if i == j:
        raise ValueError("flux needs two distinct nodes")
    if form not in ("paper", "simini"):
        raise ConfigError(f"unknown radiation form {form!r}")
    k = g.degrees.astype(float)
    d = g.distances_from(i)
    closer = d < d[j]
    closer[i] = False
    closer[j] = False
    r = _fsum(k[closer])
    value, degenerate = _flux(k[i], k[i], k[j], r, form)
    value = float(value)
    return (value, bool(degenerate)) if return_flag else value


def _radiation_pair_flux(g: SpatialGraph, pi, pj, pd, radius, form):
    """T_ij and T_ji for the given unordered pairs, all closer than ``radius``."""
    k = g.degrees.astype(float)
    n = g.n_nodes
    # per node: neighbours within radius sorted by distance, prefix sums of degree
    sorted_d = [None] * n
    prefix = [None] * n
    balls = g.tree.query_ball_point(g.positions, radius)
    for u in range(n):
        nb = np.array([v for v in balls[u] if v != u], dtype=np.int64)
        if len(nb):
            dist = _norm(g.positions[nb] - g.positions[u])
            order = np.argsort(dist, kind="stable")
            sorted_d[u] = dist[order]
            prefix[u] = np.concatenate([[0.0], np.cumsum(k[nb[order]])])
        else:
            sorted_d[u] = np.empty(0)
            prefix[u] = np.zeros(1)

    def intervening(src, dst, dd):
        out = np.empty(len(src))
        for idx, (s, dist) in enumerate(zip(src.tolist(), dd.tolist())):
            # strictly closer neighbours; dst itself sits at dist and is excluded
            out[idx] = prefix[s][np.searchsorted(sorted_d[s], dist, side="left")]
        return out

    r_ij = intervening(pi, pj, pd)
    r_ji = intervening(pj, pi, pd)
    t_ij, _ = _flux(k[pi], k[pi], k[pj], r_ij, form)
    t_ji, _ = _flux(k[pj], k[pj], k[pi], r_ji, form)
    return t_ij, t_ji


# ----------------------------------------------------------------- nature

def neighborhood_avg_degree(g: SpatialGraph, i: int, x_c: float) -> float:
    nbrs = neighbors_within(g, i, x_c)
    k = g.degrees
    return float(k[nbrs].sum() + k[i]) / (len(nbrs) + 1)


def _all_neighborhood_avg_degrees(g: SpatialGraph, x_c: float):
    n = g.n_nodes
    k = g.degrees.astype(float)
    i, j, d = g.pairs_within(x_c)
    inside = strictly_inside(d, x_c)
    i, j = i[inside], j[inside]
    count = np.bincount(i, minlength=n) + np.bincount(j, minlength=n)
    ksum = np.bincount(i, weights=k[j], minlength=n) + np.bincount(j, weights=k[i], minlength=n)
    return (ksum + k) / (count + 1), (i, j)


# ---------------------------------------------------------------- context

class MetricContext:
    """Precomputed, read-only state for evaluating one metric on one graph.

    Build with :func:`build_context`.
    """

    def __init__(self, kind: MetricKind, graph: SpatialGraph, config: MetricConfig):
        self.kind = kind
        self.graph = graph
        self.config = config
        self.m = graph.n_edges
        self.pair_matrix: sparse.csr_matrix | None = None
        self.scale = 1.0 / self.m if self.m else float("nan")
        self.bins: DistanceBins | None = None
        self.importance = None
        self.deterrence = None
        self.x_c = None
        self.nbr_avg_degree = None
        self.mean_degree = None
        # upper-triangle support of the null model with its values
        self.null_pairs = None
        self.null_values = None
        self.flux_hat = None
        self.bin_flux = None

    @property
    def ready(self) -> bool:
        return self.pair_matrix is not None

    def null_term(self, i: int, j: int) -> float:
        """P_ij of the metric's null model (``-C_ij`` for missing pairs under nature)."""
        g = self.graph
        if self.kind is MetricKind.NG:
            return float(g.degrees[i] * g.degrees[j]) / (2.0 * self.m)
        if i == j:
            return 0.0
        if self.kind is MetricKind.NATURE:
            return abs(self.strength(i, j)) if strictly_inside(g.distance(i, j), self.x_c) else 0.0
        a, b = min(i, j), max(i, j)
        pi, pj = self.null_pairs
        lo = np.searchsorted(pi, a, side="left")
        hi = np.searchsorted(pi, a, side="right")
        k = lo + np.searchsorted(pj[lo:hi], b)
        if k < hi and pj[k] == b:
            return float(self.null_values[k])
        return 0.0

    def strength(self, i: int, j: int) -> float:
        if self.kind is not MetricKind.NATURE:
            raise ConfigError("pair strengths are only defined for the nature metric")
        if i == j:
            raise ValueError("no strength is defined for i == j")
        kb = self.nbr_avg_degree
        return (kb[i] + kb[j]) / 2.0 - self.mean_degree

    def __repr__(self):
        return f"MetricContext(kind={self.kind.value}, n_nodes={self.graph.n_nodes}, m={self.m})"


def build_context(g: SpatialGraph, kind, config: MetricConfig | None = None) -> MetricContext:
    kind = MetricKind.parse(kind)
    config = config or MetricConfig()
    _require_edges(g)
    ctx = MetricContext(kind, g, config)
    n = g.n_nodes

    if kind is MetricKind.NG:
        e = g.edges
        ctx.pair_matrix = _sym_matrix(n, e[:, 0], e[:, 1], g.edge_weights)
        return ctx

    if kind is MetricKind.NATURE:
        x_c = config.resolved_cutoff(g)
        kbar, (ci, cj) = _all_neighborhood_avg_degrees(g, x_c)
        ctx.x_c = x_c
        ctx.nbr_avg_degree = kbar
        ctx.mean_degree = float(g.degrees.mean())
        # edges carry a_ij * A_ij, missing pairs inside the cutoff carry -|b_ij|
        e = g.edges
        pi = np.concatenate([e[:, 0], ci])
        pj = np.concatenate([e[:, 1], cj])
        key = pi * n + pj
        key = np.unique(key)
        pi, pj = key // n, key % n
        a = (kbar[pi] + kbar[pj]) / 2.0 - ctx.mean_degree
        w = _edge_values(g, pi, pj)
        c = np.where(w > 0, a * w, -np.abs(a))
        ctx.pair_matrix = _sym_matrix(n, pi, pj, c)
        ctx.scale = 2.0 / ctx.m
        return ctx

    # gravity and radiation: per-bin normalised null terms
    bins = bin_distances(g, config.resolved_bin_width(g))
    ctx.bins = bins
    radius = bins.support_radius
    pi, pj, pd = g.pairs_within(radius)
    pb = bins.bin_index(pd)
    valid = pb < bins.n_bins
    active = np.zeros(bins.n_bins, dtype=bool)
    active[bins.active_bins] = True
    keep = np.zeros(len(pb), dtype=bool)
    keep[valid] = active[pb[valid]]
    pi, pj, pd, pb = pi[keep], pj[keep], pd[keep], pb[keep]

    if kind is MetricKind.GRAVITY:
        importance = g.degrees.astype(float)
        f = deterrence_function(bins, importance)
        ctx.importance = importance
        ctx.deterrence = f
        null = importance[pi] * importance[pj] * f[pb]
    else:
        t_ij, t_ji = _radiation_pair_flux(g, pi, pj, pd, radius, config.radiation_form)
        t_hat = (t_ij + t_ji) / 2.0
        null = np.zeros(len(pi))
        bin_flux = np.zeros(bins.n_bins)
        for b in np.flatnonzero(active):
            sel = pb == b
            total = _fsum(t_hat[sel])
            bin_flux[b] = total
            if total > 0:
                null[sel] = t_hat[sel] * (bins.weight_sums[b] / total)
        ctx.flux_hat = t_hat
        ctx.bin_flux = bin_flux

    ctx.null_pairs = (pi, pj)
    ctx.null_values = null
    ctx.pair_matrix = _sym_matrix(n, pi, pj, _edge_values(g, pi, pj) - null)
    return ctx


# ------------------------------------------------------------- evaluation

def _check_kind(ctx: MetricContext, kind: MetricKind):
    if not ctx.ready:
        raise ConfigError("metric context is not initialised")
    if ctx.kind is not kind:
        raise ConfigError(f"context was built for {ctx.kind.value}, not {kind.value}")


def _intra_sum(ctx: MetricContext, labels: np.ndarray) -> float:
    """Sum of B_ij over unordered pairs i < j sharing a community."""
    mat = sparse.triu(ctx.pair_matrix, k=1).tocoo()
    same = labels[mat.row] == labels[mat.col]
    return _fsum(mat.data[same])


def _labels(ctx: MetricContext, p: Partition) -> np.ndarray:
    if p.n_nodes != ctx.graph.n_nodes:
        raise ValueError("partition and graph sizes differ")
    return p.labels


def ng_modularity(ctx: MetricContext, p: Partition) -> float:
    _check_kind(ctx, MetricKind.NG)
    labels = _labels(ctx, p)
    m = ctx.m
    _, inv = np.unique(labels, return_inverse=True)
    k_tot = np.bincount(inv, weights=ctx.graph.degrees.astype(float))
    return _fsum([_intra_sum(ctx, labels) / m, -_fsum((k_tot / (2.0 * m)) ** 2)])


def gravity_modularity(ctx: MetricContext, p: Partition) -> float:
    _check_kind(ctx, MetricKind.GRAVITY)
    return _intra_sum(ctx, _labels(ctx, p)) / ctx.m


def radiation_modularity(ctx: MetricContext, p: Partition) -> float:
    _check_kind(ctx, MetricKind.RADIATION)
    return _intra_sum(ctx, _labels(ctx, p)) / ctx.m


def nature_modularity(ctx: MetricContext, p: Partition) -> float:
    _check_kind(ctx, MetricKind.NATURE)
    labels = _labels(ctx, p)
    mat = sparse.triu(ctx.pair_matrix, k=1).tocoo()
    same = labels[mat.row] == labels[mat.col]
    signed = np.where(same, mat.data, -mat.data)
    return _fsum(signed) / ctx.m


_DISPATCH = {
    MetricKind.NG: ng_modularity,
    MetricKind.GRAVITY: gravity_modularity,
    MetricKind.RADIATION: radiation_modularity,
    MetricKind.NATURE: nature_modularity,
}


def modularity(ctx: MetricContext, p: Partition) -> float:
    if ctx is None or not getattr(ctx, "ready", False):
        raise ConfigError("metric context is not initialised")
    return _DISPATCH[ctx.kind](ctx, p)


def pair_strength(ctx: MetricContext, i: int, j: int) -> float:
    return ctx.strength(i, j)


def cross_sum(ctx: MetricContext, a_nodes, b_nodes) -> float:
    """Sum of B_ij over i in ``a_nodes``, j in ``b_nodes``."""
    block = ctx.pair_matrix[np.asarray(a_nodes)][:, np.asarray(b_nodes)]
    return _fsum(block.data)


def merge_gain(ctx: MetricContext, cross: float, k_a: float = 0.0, k_b: float = 0.0) -> float:
    """ΔQ of merging two communities given their cross-pair coefficient sum.

    ``k_a``/``k_b`` are total degrees, only used by the configuration model.
    """
    gain = ctx.scale * cross
    if ctx.kind is MetricKind.NG:
        gain -= k_a * k_b / (2.0 * ctx.m * ctx.m)
    return gain


def delta_q(ctx: MetricContext, p: Partition, source_community: int, target_community: int) -> float:
    """Q after merging ``source_community`` into ``target_community``, minus Q now."""
    if not ctx.ready:
        raise ConfigError("metric context is not initialised")
    if source_community == target_community:
        raise InvalidMergeError("cannot merge a community with itself")
    try:
        a = p.members[source_community]
        b = p.members[target_community]
    except KeyError as exc:
        raise InvalidMergeError(f"community {exc.args[0]} does not exist") from None
    g = ctx.graph
    if g.adjacency[np.asarray(a)][:, np.asarray(b)].nnz == 0:
        raise InvalidMergeError("communities share no edge")
    k = g.degrees
    return merge_gain(ctx, cross_sum(ctx, a, b), float(k[a].sum()), float(k[b].sum()))
