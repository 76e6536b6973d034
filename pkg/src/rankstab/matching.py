"""Bottleneck matching distance between diagrams and its sampled multi-parameter version."""
from __future__ import annotations

import io
import math
from collections import deque
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .foliation import AdmissiblePair, pair_angle, reduce
from .grid_domain import GridGraph
from .persistence import PersistenceDiagram, sublevel_diagram_0
from .set_encodings import MultiField

INF = math.inf
Point = Tuple[float, float]


def point_cost(p: Point, q: Point) -> float:
    """Cost of pairing two off-diagonal points, or of sending both to the diagonal if cheaper."""
    linf = max(abs(p[0] - q[0]), abs(p[1] - q[1]))
    return min(linf, max(diagonal_cost(p), diagonal_cost(q)))


def diagonal_cost(p: Point) -> float:
    return (p[1] - p[0]) / 2.0


def hopcroft_karp(adj: Sequence[Sequence[int]], n_right: int) -> int:
    """Size of a maximum matching; ``adj[i]`` lists right vertices adjacent to left vertex ``i``."""
    n_left = len(adj)
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    # greedy start
    size = 0
    for i in range(n_left):
        for j in adj[i]:
            if match_r[j] < 0:
                match_l[i], match_r[j] = j, i
                size += 1
                break
    dist = [0] * n_left
    while True:
        queue = deque()
        for i in range(n_left):
            if match_l[i] < 0:
                dist[i] = 0
                queue.append(i)
            else:
                dist[i] = -1
        found = False
        while queue:
            i = queue.popleft()
            for j in adj[i]:
                k = match_r[j]
                if k < 0:
                    found = True
                elif dist[k] < 0:
                    dist[k] = dist[i] + 1
                    queue.append(k)
        if not found:
            return size
        # layered DFS, iterative
        ptr = [0] * n_left
        for root in range(n_left):
            if match_l[root] >= 0:
                continue
            stack = [root]
            while stack:
                i = stack[-1]
                nbrs = adj[i]
                advanced = False
                while ptr[i] < len(nbrs):
                    j = nbrs[ptr[i]]
                    ptr[i] += 1
                    k = match_r[j]
                    if k < 0:
                        # augment along the stack
                        for node in reversed(stack):
                            nxt = match_l[node]
                            match_l[node], match_r[j] = j, node
                            j = nxt
                        size += 1
                        stack = []
                        advanced = True
                        break
                    if dist[k] == dist[i] + 1:
                        stack.append(k)
                        advanced = True
                        break
                if not advanced:
                    dist[i] = -1
                    stack.pop()


def _perfect_at(cost: np.ndarray, del_a: np.ndarray, del_b: np.ndarray, delta: float) -> bool:
    """Whether a perfect matching exists with every used edge costing at most ``delta``.

    Left side: points of A, then one diagonal slot per point of B.
    Right side: points of B, then one diagonal slot per point of A.
    """
    n, m = cost.shape
    adj: List[List[int]] = []
    ok = cost <= delta
    for i in range(n):
        row = np.flatnonzero(ok[i]).tolist()
        if del_a[i] <= delta:
            row.append(m + i)
        adj.append(row)
    diag_slots = list(range(m, m + n))
    for j in range(m):
        row = [j] if del_b[j] <= delta else []
        adj.append(row + diag_slots)
    return hopcroft_karp(adj, m + n) == n + m


def _finite_bottleneck(a: Sequence[Point], b: Sequence[Point]) -> float:
    n, m = len(a), len(b)
    if n == 0 and m == 0:
        return 0.0
    pa = np.asarray(a, dtype=float).reshape(n, 2)
    pb = np.asarray(b, dtype=float).reshape(m, 2)
    del_a = (pa[:, 1] - pa[:, 0]) / 2.0
    del_b = (pb[:, 1] - pb[:, 0]) / 2.0
    linf = np.maximum(np.abs(pa[:, None, 0] - pb[None, :, 0]), np.abs(pa[:, None, 1] - pb[None, :, 1]))
    cost = np.minimum(linf, np.maximum(del_a[:, None], del_b[None, :]))
    candidates = np.unique(np.concatenate([[0.0], cost.ravel(), del_a, del_b]))
    # the largest candidate is always feasible: everything can go to the diagonal
    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _perfect_at(cost, del_a, del_b, candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def _essential_bottleneck(a: Sequence[float], b: Sequence[float]) -> float:
    if len(a) != len(b):
        return INF
    if not a:
        return 0.0
    # sorted pairing is optimal on the line
    return max(abs(x - y) for x, y in zip(sorted(a), sorted(b)))


def dmatch_1d(a: PersistenceDiagram, b: PersistenceDiagram) -> float:
    """Bottleneck distance; ``inf`` when the numbers of essential classes differ."""
    ess = _essential_bottleneck(a.essential, b.essential)
    if ess == INF:
        return INF
    return max(ess, _finite_bottleneck(a.finite, b.finite))


def scale_diagram(dgm: PersistenceDiagram, mu: float) -> PersistenceDiagram:
    if not mu > 0:
        raise ValueError(f"scale factor must be positive, got {mu}")
    return PersistenceDiagram(tuple((b * mu, d * mu) for b, d in dgm.finite),
                              tuple(b * mu for b in dgm.essential))


@dataclass(frozen=True)
class LeafResult:
    pair: AdmissiblePair
    dmatch: float

    @property
    def weighted(self) -> float:
        return self.pair.min_l * self.dmatch


def dmatch_per_leaf(graph: GridGraph, F: MultiField, G: MultiField,
                    leaves: Sequence[AdmissiblePair]) -> List[LeafResult]:
    if F.k != G.k:
        raise ValueError(f"component count mismatch: {F.k} vs {G.k}")
    if F.extent != G.extent:
        raise ValueError(f"extent mismatch: {F.extent} vs {G.extent}")
    if not leaves:
        raise ValueError("need at least one leaf")
    out = []
    for pair in leaves:
        da = sublevel_diagram_0(graph, reduce(F, pair))
        db = sublevel_diagram_0(graph, reduce(G, pair))
        out.append(LeafResult(pair, dmatch_1d(da, db)))
    return out


def dmatch_multi_lower_bound(graph: GridGraph, F: MultiField, G: MultiField,
                             leaves: Sequence[AdmissiblePair]) -> float:
    """Max over the given leaves of ``min_i l_i * d_match``.

    A finite sample of leaves, so this bounds the multi-parameter matching
    distance from below.
    """
    return max(r.weighted for r in dmatch_per_leaf(graph, F, G, leaves))


def _fmt(x: float) -> str:
    return "inf" if x == INF else format(x, ".17g")


def leaf_table_csv(results: Sequence[LeafResult]) -> str:
    buf = io.StringIO()
    buf.write("theta,b_offset,min_l,dmatch,weighted\n")
    for r in results:
        buf.write(",".join(_fmt(x) for x in (pair_angle(r.pair), r.pair.b[0], r.pair.min_l,
                                             r.dmatch, r.weighted)))
        buf.write("\n")
    return buf.getvalue()
