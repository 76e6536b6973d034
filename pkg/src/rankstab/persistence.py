"""Degree-0 sublevel-set persistence on grid graphs and brute-force rank oracles.

Only connected components are tracked, so the coefficient field plays no role;
extensions to higher degree would need to fix one.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .grid_domain import GridGraph
from .set_encodings import MultiField, ScalarField


@dataclass(frozen=True)
class PersistenceDiagram:
    """Finite (birth, death) pairs plus births of classes that never die."""

    finite: Tuple[Tuple[float, float], ...] = ()
    essential: Tuple[float, ...] = ()

    def __post_init__(self):
        finite = tuple(sorted((float(b), float(d)) for b, d in self.finite))
        for b, d in finite:
            if not b < d:
                raise ValueError(f"finite point ({b}, {d}) must have birth < death")
        object.__setattr__(self, "finite", finite)
        object.__setattr__(self, "essential", tuple(sorted(float(b) for b in self.essential)))

    def __len__(self) -> int:
        return len(self.finite) + len(self.essential)

    def to_json(self) -> str:
        return diagram_to_json(self)

    @classmethod
    def from_json(cls, text: str) -> "PersistenceDiagram":
        return diagram_from_json(text)


@dataclass(frozen=True)
class RankQuery:
    u: Tuple[float, ...]
    v: Tuple[float, ...]

    def __post_init__(self):
        u = tuple(float(x) for x in self.u)
        v = tuple(float(x) for x in self.v)
        if len(u) != len(v) or not u:
            raise ValueError("u and v must be non-empty vectors of equal length")
        if not all(a < b for a, b in zip(u, v)):
            raise ValueError(f"query needs u < v componentwise, got u={u}, v={v}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)


def _check_extent(graph: GridGraph, f) -> None:
    if graph.extent != f.extent:
        raise ValueError(f"extent mismatch: graph {graph.extent} vs field {f.extent}")


def sublevel_diagram_0(graph: GridGraph, f: ScalarField) -> PersistenceDiagram:
    """Elder-rule union-find over the lower-star filtration of ``f``.

    Vertices enter in ``(value, index)`` order; an edge enters with its later
    endpoint. At a merge the component with the smaller ``(birth, root)`` key
    survives, and the younger one dies unless its birth equals the merge value.
    """
    _check_extent(graph, f)
    vals = f.values.ravel().tolist()
    order = np.lexsort((np.arange(len(vals)), f.values.ravel())).tolist()
    nbrs = graph.neighbors
    parent = list(range(len(vals)))
    rank = [-1] * len(vals)  # position in filtration order; -1 = not yet entered
    finite = []

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    # the root of each component is its oldest vertex, so comparing filtration
    # positions of roots is the (birth value, index) comparison
    for pos, x in enumerate(order):
        rank[x] = pos
        fx = vals[x]
        for y in nbrs[x]:
            if rank[y] < 0:
                continue
            rx, ry = find(x), find(y)
            if rx == ry:
                continue
            if rank[rx] < rank[ry]:
                elder, younger = rx, ry
            else:
                elder, younger = ry, rx
            birth = vals[younger]
            if birth < fx:
                finite.append((birth, fx))
            parent[younger] = elder
    essential = [vals[x] for x in range(len(vals)) if parent[x] == x]
    return PersistenceDiagram(tuple(finite), tuple(essential))


def rank_from_diagram(dgm: PersistenceDiagram, s: float, t: float) -> int:
    """Number of classes born at or before ``s`` and still alive at ``t``."""
    if not s < t:
        raise ValueError(f"need s < t, got s={s}, t={t}")
    alive = sum(1 for b, d in dgm.finite if b <= s and d > t)
    return alive + sum(1 for b in dgm.essential if b <= s)


def _components(graph: GridGraph, mask: np.ndarray) -> Tuple[int, np.ndarray]:
    """Connected components of the subgraph induced by ``mask`` (flat bool array).

    Labels of vertices outside ``mask`` are meaningless.
    """
    n = graph.n_vertices
    e = graph.edges
    keep = mask[e[:, 0]] & mask[e[:, 1]]
    e = e[keep]
    adj = coo_matrix((np.ones(len(e), dtype=np.int8), (e[:, 0], e[:, 1])), shape=(n, n))
    _, labels = connected_components(adj, directed=False)
    return n, labels


def _touched_components(graph: GridGraph, small: np.ndarray, large: np.ndarray) -> int:
    """Components of ``large`` meeting ``small`` (``small`` is a subset of ``large``)."""
    if not small.any():
        return 0
    _, labels = _components(graph, large)
    return len(np.unique(labels[small]))


def rank_oracle_1d(graph: GridGraph, f: ScalarField, s: float, t: float,
                   within: Optional[np.ndarray] = None) -> int:
    """Rank at ``(s, t)`` by labelling the sublevel subgraphs directly.

    ``within`` restricts the space to the subgraph induced by a pixel mask,
    which gives the rank invariant of ``(K, f|K)``.
    """
    if not s < t:
        raise ValueError(f"need s < t, got s={s}, t={t}")
    _check_extent(graph, f)
    vals = f.values.ravel()
    space = np.ones(vals.shape, dtype=bool) if within is None else np.asarray(within, dtype=bool).ravel()
    return _touched_components(graph, space & (vals <= s), space & (vals <= t))


def rank_oracle_multi(graph: GridGraph, F: MultiField, q: RankQuery,
                      within: Optional[np.ndarray] = None) -> int:
    """Multi-parameter rank at ``(u, v)``: components of the ``v``-sublevel set touched by the ``u``-sublevel set."""
    if len(q.u) != F.k:
        raise ValueError(f"query has {len(q.u)} components, field has {F.k}")
    _check_extent(graph, F)
    arr = F.array().reshape(F.k, -1)
    u = np.asarray(q.u)[:, None]
    v = np.asarray(q.v)[:, None]
    space = np.ones(arr.shape[1], dtype=bool) if within is None else np.asarray(within, dtype=bool).ravel()
    return _touched_components(graph, space & (arr <= u).all(axis=0), space & (arr <= v).all(axis=0))


def n_components(graph: GridGraph) -> int:
    _, labels = _components(graph, np.ones(graph.n_vertices, dtype=bool))
    return len(np.unique(labels))


# --- serialization -----------------------------------------------------------

def _num(x: float) -> str:
    return format(float(x), ".17g")


def diagram_to_json(dgm: PersistenceDiagram) -> str:
    finite = ", ".join(f"[{_num(b)}, {_num(d)}]" for b, d in dgm.finite)
    essential = ", ".join(_num(b) for b in dgm.essential)
    return f'{{"finite": [{finite}], "essential": [{essential}]}}'


def diagram_from_json(text: str) -> PersistenceDiagram:
    obj = json.loads(text)
    return PersistenceDiagram(tuple(tuple(p) for p in obj.get("finite", [])),
                              tuple(obj.get("essential", [])))


def diagram_to_csv(dgm: PersistenceDiagram) -> str:
    lines = ["birth,death"]
    lines += [f"{_num(b)},{_num(d)}" for b, d in dgm.finite]
    lines += [f"{_num(b)},inf" for b in dgm.essential]
    return "\n".join(lines) + "\n"


def diagram_from_csv(text: str) -> PersistenceDiagram:
    finite, essential = [], []
    for line in text.splitlines()[1:]:
        if not line.strip():
            continue
        b, d = line.split(",")
        if d.strip() == "inf":
            essential.append(float(b))
        else:
            finite.append((float(b), float(d)))
    return PersistenceDiagram(tuple(finite), tuple(essential))
