"""Deterministic greedy merging: singletons, node merging, community merging."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .graph import Partition, SpatialGraph
from .metrics import MetricConfig, MetricContext, build_context, merge_gain, modularity

# gains at or below this are rounding noise, never improvements
MIN_GAIN = 1e-12


@dataclass(frozen=True)
class ClusterConfig:
    metric: MetricConfig = field(default_factory=MetricConfig)
    max_passes: int | None = None
    min_gain: float = MIN_GAIN


@dataclass(frozen=True)
class TraceRecord:
    phase: str
    step: int
    q: float


@dataclass
class ClusterRun:
    partition: Partition
    q: float
    trace: list
    node_passes: int = 0
    community_passes: int = 0
    converged: bool = False

    @property
    def accepted(self) -> int:
        return len(self.trace) - 1


class _MergeState:
    """Community-level aggregates of edge counts and pair coefficients.

    ``links[c][d]`` holds ``[edges between c and d, sum of B_ij over c x d]``.
    """

    def __init__(self, ctx: MetricContext, p: Partition):
        self.ctx = ctx
        self.p = p.copy()
        g = ctx.graph
        labels = self.p.labels
        self.k_tot = {c: float(g.degrees[m].sum()) for c, m in self.p.members.items()}
        self.links: dict[int, dict[int, list]] = {c: {} for c in self.p.members}

        adj = sparse.triu(g.adjacency, k=1).tocoo()
        for i, j in zip(adj.row.tolist(), adj.col.tolist()):
            ci, cj = int(labels[i]), int(labels[j])
            if ci != cj:
                self._entry(ci, cj)[0] += 1
                self._entry(cj, ci)[0] += 1
        mat = sparse.triu(ctx.pair_matrix, k=1).tocoo()
        for i, j, v in zip(mat.row.tolist(), mat.col.tolist(), mat.data.tolist()):
            ci, cj = int(labels[i]), int(labels[j])
            if ci != cj:
                self._entry(ci, cj)[1] += v
                self._entry(cj, ci)[1] += v

    def _entry(self, c, d):
        row = self.links[c]
        if d not in row:
            row[d] = [0, 0.0]
        return row[d]

    def connected(self, c, d) -> bool:
        e = self.links[c].get(d)
        return e is not None and e[0] > 0

    def gain(self, c, d) -> float:
        e = self.links[c].get(d)
        cross = e[1] if e is not None else 0.0
        return merge_gain(self.ctx, cross, self.k_tot[c], self.k_tot[d])

    def merge(self, source, target):
        src_links = self.links.pop(source)
        tgt_links = self.links[target]
        tgt_links.pop(source, None)
        for d, (cnt, w) in src_links.items():
            if d == target:
                continue
            other = self.links[d]
            other.pop(source)
            if d in tgt_links:
                tgt_links[d][0] += cnt
                tgt_links[d][1] += w
                other[target][0] += cnt
                other[target][1] += w
            else:
                tgt_links[d] = [cnt, w]
                other[target] = [cnt, w]
        self.k_tot[target] += self.k_tot.pop(source)
        self.p.merge(source, target)


class _Runner:
    def __init__(self, ctx, p, min_gain, q0=None):
        self.state = _MergeState(ctx, p)
        self.min_gain = min_gain
        self.q = modularity(ctx, p) if q0 is None else q0
        self.trace = [TraceRecord("init", 0, self.q)]

    def _accept(self, phase, source, target, gain):
        self.state.merge(source, target)
        self.q += gain
        self.trace.append(TraceRecord(phase, len(self.trace), self.q))

    def node_pass(self) -> int:
        st = self.state
        g = st.ctx.graph
        accepted = 0
        for v in range(g.n_nodes):
            c = int(st.p.labels[v])
            targets = sorted({int(st.p.labels[u]) for u in g.neighbors(v)} - {c})
            best, best_gain = None, self.min_gain
            for d in targets:
                gain = st.gain(c, d)
                if gain > best_gain:
                    best, best_gain = d, gain
            if best is not None:
                self._accept("node", c, best, best_gain)
                accepted += 1
        return accepted

    def community_pass(self) -> int:
        st = self.state
        accepted = 0
        while True:
            pairs = sorted(
                (c, d) for c, row in st.links.items() for d, (cnt, _) in row.items() if c < d and cnt > 0
            )
            swept = 0
            for a, b in pairs:
                if a not in st.links or b not in st.links:
                    continue
                gain = st.gain(a, b)
                if gain > self.min_gain:
                    self._accept("community", b, a, gain)
                    swept += 1
            accepted += swept
            if swept == 0:
                return accepted


def init_singletons(g: SpatialGraph) -> Partition:
    return Partition.singletons(g.n_nodes)


def node_merge_pass(ctx: MetricContext, p: Partition, min_gain: float = MIN_GAIN):
    """One sweep over nodes in id order, merging each node's community into
    the connected neighbour community with the largest positive gain."""
    r = _Runner(ctx, p, min_gain)
    n = r.node_pass()
    return r.state.p, n


def community_merge_pass(ctx: MetricContext, p: Partition, min_gain: float = MIN_GAIN):
    """Merge connected community pairs first-improving, sweeping until stable."""
    r = _Runner(ctx, p, min_gain)
    n = r.community_pass()
    return r.state.p, n


def cluster(g: SpatialGraph, kind, config: ClusterConfig | None = None,
            ctx: MetricContext | None = None) -> ClusterRun:
    config = config or ClusterConfig()
    if ctx is None:
        ctx = build_context(g, kind, config.metric)
    r = _Runner(ctx, init_singletons(g), config.min_gain)
    passes = {"node": 0, "community": 0}
    limit = config.max_passes

    def budget_left():
        return limit is None or passes["node"] + passes["community"] < limit

    converged = False
    while budget_left():
        while budget_left():
            passes["node"] += 1
            if r.node_pass() == 0:
                break
        else:
            break
        if not budget_left():
            break
        passes["community"] += 1
        if r.community_pass() == 0:
            converged = True
            break

    final = r.state.p
    return ClusterRun(
        partition=final,
        q=modularity(ctx, final),
        trace=r.trace,
        node_passes=passes["node"],
        community_passes=passes["community"],
        converged=converged,
    )


def local_optimum_violations(ctx: MetricContext, p: Partition, min_gain: float = MIN_GAIN):
    """Connected community pairs whose merge would still raise Q."""
    st = _MergeState(ctx, p)
    return [
        (c, d) for c, row in st.links.items() for d, (cnt, _) in row.items()
        if c < d and cnt > 0 and st.gain(c, d) > min_gain
    ]


def write_trace(run: ClusterRun, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("phase,step,q\n")
        for rec in run.trace:
            fh.write(f"{rec.phase},{rec.step},{rec.q:.17g}\n")


def community_sizes(p: Partition) -> np.ndarray:
    return np.array(p.sizes(), dtype=np.int64)
