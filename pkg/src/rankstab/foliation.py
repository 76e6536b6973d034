"""Half-plane leaves of the multi-parameter domain and reduction to one parameter.

A leaf is fixed by an admissible pair ``(l, b)``: ``l`` positive with unit
Euclidean norm, ``b`` summing to zero. Points on it are ``(s*l + b, t*l + b)``
with ``s < t``, and the multi-parameter rank there equals the one-parameter
rank of ``max_i (F_i - b_i) / l_i`` at ``(s, t)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .grid_domain import BinaryGrid, adjacency_graph
from .persistence import RankQuery, rank_from_diagram, sublevel_diagram_0
from .set_encodings import MultiField, ScalarField, distance_transform, stack

ADMISSIBLE_TOL = 1e-12
DEFAULT_ANGLE_MARGIN = math.pi / 64


@dataclass(frozen=True)
class AdmissiblePair:
    l: Tuple[float, ...]
    b: Tuple[float, ...]

    def __post_init__(self):
        l = tuple(float(x) for x in self.l)
        b = tuple(float(x) for x in self.b)
        if len(l) != len(b) or not l:
            raise ValueError("l and b must be non-empty vectors of equal length")
        if not all(x > 0 for x in l):
            raise ValueError(f"l must be strictly positive, got {l}")
        if abs(math.fsum(x * x for x in l) - 1.0) > ADMISSIBLE_TOL:
            raise ValueError(f"l must have unit norm, got {l}")
        if abs(math.fsum(b)) > ADMISSIBLE_TOL:
            raise ValueError(f"b must sum to zero, got {b}")
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "b", b)

    @property
    def k(self) -> int:
        return len(self.l)

    @property
    def min_l(self) -> float:
        return min(self.l)

    def to_dict(self) -> dict:
        return {"l": list(self.l), "b": list(self.b)}


@dataclass(frozen=True)
class LeafPoint:
    """A point ``(s, t)`` on the leaf of ``pair``.

    ``boundary_proximate`` marks points computed with ``alpha = 0``, where the
    leaf sits next to the non-admissible pair ``((0, 1), (0, 0))`` and
    rank evaluations are numerically fragile.
    """

    pair: AdmissiblePair
    s: float
    t: float
    boundary_proximate: bool = False

    def __post_init__(self):
        if not self.s < self.t:
            raise ValueError(f"leaf point needs s < t, got s={self.s}, t={self.t}")


def reduce(F: MultiField, pair: AdmissiblePair) -> ScalarField:
    """Pointwise ``max_i (F_i - b_i) / l_i``."""
    if F.k != pair.k:
        raise ValueError(f"field has {F.k} components, pair has {pair.k}")
    out = None
    for comp, li, bi in zip(F.components, pair.l, pair.b):
        g = (comp.values - bi) / li
        out = g if out is None else np.maximum(out, g)
    return ScalarField(out)


def leaf_point_to_query(p: LeafPoint) -> RankQuery:
    l, b = p.pair.l, p.pair.b
    return RankQuery(tuple(p.s * li + bi for li, bi in zip(l, b)),
                     tuple(p.t * li + bi for li, bi in zip(l, b)))


def leaf_params(alpha: float, u: float, beta: float, v: float) -> LeafPoint:
    """The unique 2-parameter leaf point mapping to ``((alpha, u), (beta, v))``."""
    if not (alpha < beta and u < v):
        raise ValueError(f"((alpha, u), (beta, v)) must satisfy alpha < beta and u < v; "
                         f"got alpha={alpha}, u={u}, beta={beta}, v={v}")
    da, du = beta - alpha, v - u
    norm = math.hypot(da, du)
    l1, l2 = da / norm, du / norm
    denom = da + du
    b1 = (alpha * (beta + v) - beta * (alpha + u)) / denom
    b2 = (u * (beta + v) - v * (alpha + u)) / denom
    s = (alpha + u) / (l1 + l2)
    t = (beta + v) / (l1 + l2)
    # b1 + b2 == 0 analytically; absorb rounding so the pair validates
    pair = AdmissiblePair((l1, l2), (b1, -b1) if abs(b1 + b2) <= 1e-9 * max(1.0, abs(b1)) else (b1, b2))
    return LeafPoint(pair, s, t, boundary_proximate=(alpha <= 0.0))


def sample_admissible_2(n_angles: int, n_offsets: int, offset_range: float,
                        margin: float = DEFAULT_ANGLE_MARGIN) -> List[AdmissiblePair]:
    """Grid of 2-parameter admissible pairs.

    Angles are cell midpoints of ``(margin, pi/2 - margin)``; offsets ``c`` are
    evenly spaced on ``[-offset_range, offset_range]`` (just ``0`` when
    ``n_offsets == 1``) and give ``b = (c, -c)``.
    """
    if n_angles < 1 or n_offsets < 1:
        raise ValueError("n_angles and n_offsets must be positive")
    if not 0 <= margin < math.pi / 4:
        raise ValueError("margin must lie in [0, pi/4)")
    span = math.pi / 2 - 2 * margin
    thetas = [margin + (j + 0.5) * span / n_angles for j in range(n_angles)]
    offsets = [0.0] if n_offsets == 1 else np.linspace(-offset_range, offset_range, n_offsets).tolist()
    return [AdmissiblePair((math.cos(th), math.sin(th)), (c, -c)) for th in thetas for c in offsets]


def pair_angle(pair: AdmissiblePair) -> float:
    return math.atan2(pair.l[1], pair.l[0])


def leaves_to_json(leaves: Sequence[AdmissiblePair]) -> str:
    return json.dumps([p.to_dict() for p in leaves])


def leaves_from_json(text: str) -> List[AdmissiblePair]:
    return [AdmissiblePair(tuple(d["l"]), tuple(d["b"])) for d in json.loads(text)]


def recover_rank(grid: BinaryGrid, phi: ScalarField, u: float, v: float,
                 alpha: float, beta: float) -> int:
    """Rank of ``(D, (d_K, phi))`` at ``((alpha, u), (beta, v))``, evaluated on its leaf.

    For small enough ``alpha < beta`` this equals the rank of ``(K, phi|K)``
    at ``(u, v)``; choosing them is left to the caller.
    """
    if not 0 <= alpha < beta:
        raise ValueError(f"need 0 <= alpha < beta, got alpha={alpha}, beta={beta}")
    if not u < v:
        raise ValueError(f"need u < v, got u={u}, v={v}")
    if grid.is_empty():
        raise ValueError("recover_rank needs a non-empty foreground")
    if grid.extent != phi.extent:
        raise ValueError(f"extent mismatch: {grid.extent} vs {phi.extent}")
    point = leaf_params(alpha, u, beta, v)
    F = reduce(stack([distance_transform(grid), phi]), point.pair)
    dgm = sublevel_diagram_0(adjacency_graph(grid), F)
    return rank_from_diagram(dgm, point.s, point.t)
