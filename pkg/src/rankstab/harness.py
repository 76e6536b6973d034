"""Experiment layer: perturbations, stability checks, the recovery sweep and diagram plots."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np

from .foliation import (AdmissiblePair, leaf_params, recover_rank,
                        sample_admissible_2)
from .grid_domain import BinaryGrid, adjacency_graph
from .matching import LeafResult, dmatch_per_leaf, leaf_table_csv, pair_angle
from .persistence import PersistenceDiagram, rank_oracle_1d
from .set_encodings import (MultiField, ScalarField, disk_offsets, disk_size,
                            distance_transform, hausdorff, local_density,
                            max_disk_discrepancy, stack, sup_distance,
                            symmetric_difference)

BOUND_TOL = 1e-9
DEFAULT_ANGLES = 32
DEFAULT_OFFSETS = 33

# (alpha, beta) pairs swept by recovery_sweep, from coarse to fine
DEFAULT_SCHEDULE: Tuple[Tuple[float, float], ...] = (
    (0.5, 24.0), (0.5, 16.0), (0.5, 8.0), (0.5, 1.0),
    (0.5, 0.65), (0.3, 0.45), (0.1, 0.25), (0.0, 0.15),
)


# --- perturbation ------------------------------------------------------------

def perturb_salt_pepper(grid: BinaryGrid, radius: float, p_add: float, p_remove: float,
                        seed: int) -> BinaryGrid:
    """Salt & pepper noise confined to the ``radius``-neighbourhood of the foreground.

    Background pixels within ``radius`` of the foreground turn on with
    probability ``p_add``. Original foreground pixels then turn off with
    probability ``p_remove``, scanned row-major; a removal is skipped if some
    original pixel would be left with no surviving pixel within ``radius``.
    Uses numpy's PCG64 generator seeded with ``seed``.
    """
    if grid.is_empty():
        raise ValueError("cannot perturb an empty foreground")
    for name, p in (("p_add", p_add), ("p_remove", p_remove)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {p}")
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    rng = np.random.Generator(np.random.PCG64(seed))
    orig = grid.mask
    h, w = orig.shape
    near = distance_transform(grid).values <= radius
    add_draw = rng.random((h, w))
    out = orig | (near & ~orig & (add_draw < p_add))

    if p_remove > 0:
        offsets = disk_offsets(radius) if radius >= 1 else np.zeros((1, 2), dtype=int)
        # cover[y, x] = surviving pixels within radius of original pixel (x, y)
        cover = np.zeros((h, w), dtype=np.int64)
        src = out.astype(np.int64)
        for dx, dy in offsets.tolist():
            y0, y1 = max(0, -dy), min(h, h - dy)
            x0, x1 = max(0, -dx), min(w, w - dx)
            cover[y0:y1, x0:x1] += src[y0 + dy:y1 + dy, x0 + dx:x1 + dx]
        ys, xs = np.nonzero(orig)
        remove_draw = rng.random(len(ys))
        for y, x, r in zip(ys.tolist(), xs.tolist(), remove_draw.tolist()):
            if r >= p_remove:
                continue
            hit = [(y - dy, x - dx) for dx, dy in offsets.tolist()
                   if 0 <= y - dy < h and 0 <= x - dx < w and orig[y - dy, x - dx]]
            if any(cover[p] <= 1 for p in hit):
                continue
            out[y, x] = False
            for p in hit:
                cover[p] -= 1
    return BinaryGrid(out)


# --- reports -----------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


@dataclass
class ExperimentReport:
    """Outcome of one stability check: sampled matching distance versus the stability bound."""

    kind: str
    inputs: dict
    set_distance_name: str
    set_distance: float
    function_distance: float
    bound: float
    dmatch_lower_bound: float
    leaves: List[LeafResult] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def bound_satisfied(self) -> bool:
        return self.dmatch_lower_bound <= self.bound + BOUND_TOL

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "inputs": self.inputs,
            self.set_distance_name: self.set_distance,
            "phi_sup_distance": self.function_distance,
            "bound": self.bound,
            "dmatch_lower_bound": self.dmatch_lower_bound,
            "bound_satisfied": self.bound_satisfied,
            **self.extra,
            "leaves": [{"theta": pair_angle(r.pair), "b_offset": r.pair.b[0], "min_l": r.pair.min_l,
                        "dmatch": r.dmatch, "weighted": r.weighted} for r in self.leaves],
        }

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=2)

    def leaf_csv(self) -> str:
        return leaf_table_csv(self.leaves)


def default_leaves(F: MultiField, G: MultiField, n_angles: int = DEFAULT_ANGLES,
                   n_offsets: int = DEFAULT_OFFSETS) -> List[AdmissiblePair]:
    """Leaf grid with offsets spanning half the joint value range of both fields."""
    vals = np.concatenate([F.array().ravel(), G.array().ravel()])
    offset_range = max((float(vals.max()) - float(vals.min())) / 2.0, 1e-6)
    return sample_admissible_2(n_angles, n_offsets, offset_range)


def _run(kind, inputs, F, G, set_name, set_dist, fn_dist, bound, leaves, extra=None) -> ExperimentReport:
    graph = adjacency_graph(BinaryGrid.empty(*F.extent))
    if leaves is None:
        leaves = default_leaves(F, G)
    results = dmatch_per_leaf(graph, F, G, leaves)
    lower = max(r.weighted for r in results)
    return ExperimentReport(kind, inputs, set_name, set_dist, fn_dist, bound, lower, results, extra or {})


def verify_stability_hausdorff(grid1: BinaryGrid, grid2: BinaryGrid, phi1: ScalarField, phi2: ScalarField,
                               leaves: Optional[Sequence[AdmissiblePair]] = None,
                               inputs: Optional[dict] = None) -> ExperimentReport:
    """Check ``D_match((d_K1, phi1), (d_K2, phi2)) <= max(hausdorff, ||phi1 - phi2||)`` on sampled leaves."""
    F = stack([distance_transform(grid1), phi1])
    G = stack([distance_transform(grid2), phi2])
    dh = hausdorff(grid1, grid2)
    dphi = sup_distance(phi1, phi2)
    return _run("hausdorff", dict(inputs or {}), F, G, "hausdorff", dh, dphi, max(dh, dphi), leaves)


def verify_stability_symdiff(grid1: BinaryGrid, grid2: BinaryGrid, eps: float, phi1: ScalarField,
                             phi2: ScalarField, leaves: Optional[Sequence[AdmissiblePair]] = None,
                             inputs: Optional[dict] = None) -> ExperimentReport:
    """Check the symmetric-difference bound with ``(-density, phi)`` encodings.

    Densities use the full disk size as denominator, so the pointwise density
    change is at most ``d_sym / disk_size(eps)`` also near the image border.
    """
    if grid1.is_empty() or grid2.is_empty():
        raise ValueError("foregrounds must be non-empty")
    F = stack([-local_density(grid1, eps, clip=False), phi1])
    G = stack([-local_density(grid2, eps, clip=False), phi2])
    mu = disk_size(eps)
    dsym = symmetric_difference(grid1, grid2)
    dphi = sup_distance(phi1, phi2)
    extra = {
        "eps": eps,
        "disk_size": mu,
        "sharper_bound": max(max_disk_discrepancy(grid1, grid2, eps) / mu, dphi),
        "hausdorff": hausdorff(grid1, grid2),
    }
    inputs = dict(inputs or {}, eps=eps)
    return _run("symdiff", inputs, F, G, "symmetric_difference", dsym, dphi, max(dsym / mu, dphi), leaves, extra)


def verify_stability_fuzzy(p1: ScalarField, p2: ScalarField, phi1: ScalarField, phi2: ScalarField,
                           leaves: Optional[Sequence[AdmissiblePair]] = None,
                           inputs: Optional[dict] = None) -> ExperimentReport:
    """Check ``D_match((-p1, phi1), (-p2, phi2)) <= max(||p1 - p2||, ||phi1 - phi2||)``."""
    for name, p in (("p1", p1), ("p2", p2)):
        if p.values.min() < 0.0 or p.values.max() > 1.0:
            raise ValueError(f"{name} must take values in [0, 1]")
    F = stack([-p1, phi1])
    G = stack([-p2, phi2])
    dp = sup_distance(p1, p2)
    dphi = sup_distance(phi1, phi2)
    return _run("fuzzy", dict(inputs or {}), F, G, "density_sup_distance", dp, dphi, max(dp, dphi), leaves)


# --- recovery ----------------------------------------------------------------

@dataclass(frozen=True)
class RecoveryRow:
    alpha: float
    u: float
    beta: float
    v: float
    s: float
    t: float
    rank: int
    boundary_proximate: bool


@dataclass(frozen=True)
class RecoveryTable:
    rows: Tuple[RecoveryRow, ...]
    direct_rank: int

    def ranks(self) -> List[int]:
        return [r.rank for r in self.rows]

    def longest_run(self, value: int) -> int:
        """Length of the longest run of consecutive rows whose rank equals ``value``."""
        best = cur = 0
        for r in self.rows:
            cur = cur + 1 if r.rank == value else 0
            best = max(best, cur)
        return best

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["alpha", "u", "beta", "v", "s", "t", "rank", "note"])
        for r in self.rows:
            note = "boundary-proximate" if r.boundary_proximate else ""
            out.writerow([*(f"{x:.17g}" for x in (r.alpha, r.u, r.beta, r.v, r.s, r.t)), r.rank, note])
        # the direct rank closes the table; alpha, beta, s, t do not apply to it
        u, v = (f"{self.rows[0].u:.17g}", f"{self.rows[0].v:.17g}") if self.rows else ("", "")
        out.writerow(["", u, "", v, "", "", self.direct_rank, "direct"])
        return buf.getvalue()


def direct_rank(grid: BinaryGrid, phi: ScalarField, u: float, v: float) -> int:
    """Rank of ``(K, phi|K)`` at ``(u, v)`` by labelling the subgraph induced by the foreground."""
    return rank_oracle_1d(adjacency_graph(grid), phi, u, v, within=grid.mask)


def recovery_sweep(grid: BinaryGrid, phi: ScalarField, u: float, v: float,
                   schedule: Sequence[Tuple[float, float]] = DEFAULT_SCHEDULE) -> RecoveryTable:
    if not u < v:
        raise ValueError(f"need u < v, got u={u}, v={v}")
    rows = []
    for alpha, beta in schedule:
        if not 0 <= alpha < beta:
            raise ValueError(f"schedule entries need 0 <= alpha < beta, got ({alpha}, {beta})")
        p = leaf_params(alpha, u, beta, v)
        rows.append(RecoveryRow(alpha, u, beta, v, p.s, p.t,
                                recover_rank(grid, phi, u, v, alpha, beta), p.boundary_proximate))
    return RecoveryTable(tuple(rows), direct_rank(grid, phi, u, v))


# --- SVG ---------------------------------------------------------------------

def diagram_svg(dgm: PersistenceDiagram, size: int = 400, title: str = "") -> str:
    """Static persistence-diagram plot: circles for finite points, vertical lines for essential classes."""
    coords = [c for p in dgm.finite for c in p] + list(dgm.essential)
    lo, hi = (min(coords), max(coords)) if coords else (0.0, 1.0)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    margin = 40
    span = size - 2 * margin

    def px(x):
        return margin + (x - lo) / (hi - lo) * span

    def py(y):
        return size - margin - (y - lo) / (hi - lo) * span

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>',
        f'<line class="axis" x1="{margin}" y1="{size - margin}" x2="{size - margin}" y2="{size - margin}" stroke="black"/>',
        f'<line class="axis" x1="{margin}" y1="{size - margin}" x2="{margin}" y2="{margin}" stroke="black"/>',
        f'<line class="diagonal" x1="{px(lo):.3f}" y1="{py(lo):.3f}" x2="{px(hi):.3f}" y2="{py(hi):.3f}" '
        'stroke="gray" stroke-dasharray="4 3"/>',
        f'<text x="{size / 2:.1f}" y="{size - 8}" text-anchor="middle" font-size="12">birth [{lo:.4g}, {hi:.4g}]</text>',
        f'<text x="12" y="{size / 2:.1f}" font-size="12" transform="rotate(-90 12 {size / 2:.1f})" '
        'text-anchor="middle">death</text>',
    ]
    if title:
        out.append(f'<text x="{size / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>')
    for b in dgm.essential:
        out.append(f'<line class="essential" x1="{px(b):.3f}" y1="{py(b):.3f}" x2="{px(b):.3f}" y2="{margin}" '
                   'stroke="red" stroke-width="1.5"/>')
    for b, d in dgm.finite:
        out.append(f'<circle class="finite" cx="{px(b):.3f}" cy="{py(d):.3f}" r="3" fill="none" stroke="red"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_diagram_svg(dgm: PersistenceDiagram, path, title: str = "") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(diagram_svg(dgm, title=title))
