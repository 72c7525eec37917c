"""Brute-force ground truth for tests.

Everything here is evaluated by direct loops over node pairs, with no
caches shared with :mod:`granet.metrics`. Only the graph type (positions,
adjacency, degrees, distances) is common to both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, OracleSizeError, UndefinedMetricError
from .graph import BOUNDARY_RTOL, Partition, SpatialGraph
from .metrics import MetricConfig, MetricKind


@dataclass
class OracleResult:
    partition: Partition
    q: float
    examined: int
    rgs: tuple


def bell_number(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def restricted_growth_strings(n: int):
    """All set partitions of ``range(n)`` as restricted growth strings, lexicographic."""
    if n == 0:
        yield ()
        return
    a = [0] * n

    def rec(pos, mx):
        if pos == n:
            yield tuple(a)
            return
        for v in range(mx + 2):
            a[pos] = v
            yield from rec(pos + 1, max(mx, v))

    a[0] = 0
    yield from rec(1, 0)


def _pair_terms(g: SpatialGraph, kind: MetricKind, config: MetricConfig):
    """Return (B, include_diagonal, signed) where Q = 1/2m * sum B_ij * weight(δ)."""
    n = g.n_nodes
    m = g.n_edges
    if m == 0:
        raise UndefinedMetricError("m = 0")
    A = [[g.weight(i, j) if i != j else 0.0 for j in range(n)] for i in range(n)]
    k = [int(v) for v in g.degrees]
    dist = [[g.distance(i, j) for j in range(n)] for i in range(n)]
    B = [[0.0] * n for _ in range(n)]

    if kind is MetricKind.NG:
        for i in range(n):
            for j in range(n):
                B[i][j] = A[i][j] - k[i] * k[j] / (2.0 * m)
        return B, True, False

    if kind is MetricKind.NATURE:
        x_c = config.cutoff
        if x_c is None:
            x_c = {2: math.sqrt(3.0), 3: math.sqrt(2.0)}[g.dimension] * g.diameter
        inside = [[i != j and dist[i][j] < x_c * (1.0 - BOUNDARY_RTOL) for j in range(n)] for i in range(n)]
        kbar = []
        for i in range(n):
            nb = [j for j in range(n) if inside[i][j]]
            kbar.append((sum(k[j] for j in nb) + k[i]) / (len(nb) + 1))
        kmean = sum(k) / n
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                a = (kbar[i] + kbar[j]) / 2.0 - kmean
                J = 1.0 - (1.0 if A[i][j] > 0 else 0.0)
                theta = 1.0 if inside[i][j] else 0.0
                B[i][j] = a * A[i][j] - theta * abs(a) * J
        return B, False, True

    w = config.bin_width if config.bin_width is not None else 0.5 * g.diameter
    bin_of = [[math.floor(dist[i][j] / w) for j in range(n)] for i in range(n)]

    if kind is MetricKind.GRAVITY:
        pair_value = [[float(k[i] * k[j]) for j in range(n)] for i in range(n)]
    elif kind is MetricKind.RADIATION:
        form = config.radiation_form
        T = [[0.0] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                r = 0
                for u in range(n):
                    if u != i and u != j and dist[i][u] < dist[i][j]:
                        r += k[u]
                if form == "paper":
                    den = (k[i] + r) * (k[j] + r)
                else:
                    den = (k[i] + r) * (k[i] + k[j] + r)
                T[i][j] = k[i] * k[i] * k[j] / den if den > 0 else 0.0
        pair_value = [[(T[i][j] + T[j][i]) / 2.0 for j in range(n)] for i in range(n)]
    else:
        raise ConfigError(f"unknown metric {kind}")

    num: dict[int, list] = {}
    den: dict[int, list] = {}
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            num.setdefault(bin_of[i][j], []).append(A[i][j])
            den.setdefault(bin_of[i][j], []).append(pair_value[i][j])
    ratio = {}
    for b in num:
        s_num = math.fsum(num[b])
        s_den = math.fsum(den[b])
        ratio[b] = s_num / s_den if s_num > 0 and s_den > 0 else 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                B[i][j] = A[i][j] - pair_value[i][j] * ratio[bin_of[i][j]]
    return B, False, False


def _score(B, labels, m, include_diag, signed) -> float:
    n = len(labels)
    terms = []
    for i in range(n):
        for j in range(n):
            if i == j and not include_diag:
                continue
            same = labels[i] == labels[j]
            if signed:
                terms.append(B[i][j] * (2 * int(same) - 1))
            elif same:
                terms.append(B[i][j])
    return math.fsum(terms) / (2.0 * m)


def naive_modularity(g: SpatialGraph, p: Partition, kind, config: MetricConfig | None = None) -> float:
    kind = MetricKind.parse(kind)
    B, diag, signed = _pair_terms(g, kind, config or MetricConfig())
    return _score(B, list(p.labels), g.n_edges, diag, signed)


def exhaustive_best_partition(g: SpatialGraph, kind, config: MetricConfig | None = None,
                              n_max: int = 10) -> OracleResult:
    """Score every set partition; ties go to the lexicographically smallest string."""
    n = g.n_nodes
    if n > n_max:
        raise OracleSizeError(f"{n} nodes exceeds the exhaustive limit of {n_max}")
    kind = MetricKind.parse(kind)
    B, diag, signed = _pair_terms(g, kind, config or MetricConfig())
    m = g.n_edges

    strings = np.array(list(restricted_growth_strings(n)), dtype=np.int64).reshape(-1, n)
    Bm = np.array(B)
    if not diag:
        np.fill_diagonal(Bm, 0.0)
    same = (strings[:, :, None] == strings[:, None, :]).reshape(len(strings), -1)
    flat = Bm.ravel()
    if signed:
        weights = 2.0 * same - 1.0
    else:
        weights = same.astype(float)
    scores = np.array([math.fsum((w * flat).tolist()) for w in weights]) / (2.0 * m)
    best = scores.max()
    idx = int(np.flatnonzero(scores >= best - 1e-12)[0])
    rgs = tuple(int(v) for v in strings[idx])
    return OracleResult(Partition(np.array(rgs)), float(scores[idx]), len(strings), rgs)
