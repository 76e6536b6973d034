"""Encodings of pixel sets as real functions, and distances between sets.

All metric quantities use pixel-centre coordinates with unit spacing.
"""
from __future__ import annotations

import io
import math
from typing import Sequence, Tuple

import numpy as np

from .grid_domain import BinaryGrid, Extent


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


class ScalarField:
    """One finite real value per pixel, stored as a ``(height, width)`` array."""

    __slots__ = ("_values",)

    def __init__(self, values):
        values = np.array(values, dtype=np.float64, copy=True)
        if values.ndim != 2 or values.size == 0:
            raise ValueError("field values must be a non-empty 2-d array")
        if not np.isfinite(values).all():
            raise ValueError("field values must be finite")
        self._values = _frozen(values)

    @classmethod
    def constant(cls, extent: Extent, c: float) -> "ScalarField":
        w, h = extent
        return cls(np.full((h, w), float(c)))

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def extent(self) -> Extent:
        return (self._values.shape[1], self._values.shape[0])

    def at(self, x: int, y: int) -> float:
        return float(self._values[y, x])

    def __neg__(self) -> "ScalarField":
        return ScalarField(-self._values)

    def __add__(self, c) -> "ScalarField":
        if isinstance(c, ScalarField):
            _check_extents(self, c)
            return ScalarField(self._values + c._values)
        return ScalarField(self._values + float(c))

    def __mul__(self, c: float) -> "ScalarField":
        return ScalarField(self._values * float(c))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScalarField):
            return NotImplemented
        return bool(np.array_equal(self._values, other._values))

    __hash__ = None

    def __repr__(self) -> str:
        w, h = self.extent
        return f"ScalarField({w}x{h}, range=[{self._values.min():.6g}, {self._values.max():.6g}])"


class MultiField:
    """An ordered stack of ``k >= 1`` scalar fields sharing one extent."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[ScalarField]):
        components = tuple(components)
        if not components:
            raise ValueError("a MultiField needs at least one component")
        for c in components[1:]:
            _check_extents(components[0], c)
        self.components = components

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def extent(self) -> Extent:
        return self.components[0].extent

    def array(self) -> np.ndarray:
        """Values as a ``(k, height, width)`` array."""
        return np.stack([c.values for c in self.components])

    def __getitem__(self, i: int) -> ScalarField:
        return self.components[i]

    def __len__(self) -> int:
        return len(self.components)

    def __repr__(self) -> str:
        w, h = self.extent
        return f"MultiField(k={self.k}, {w}x{h})"


def _check_extents(a, b) -> None:
    if a.extent != b.extent:
        raise ValueError(f"extent mismatch: {a.extent} vs {b.extent}")


def stack(components: Sequence[ScalarField]) -> MultiField:
    """Build a multi-parameter field; component 0 is the set encoding by convention."""
    return MultiField(components)


# --- distance transform ------------------------------------------------------

def _lower_envelope_1d(g: Sequence[int], out: np.ndarray) -> None:
    """Exact 1-d squared distance transform ``out[q] = min_p (q - p)^2 + g[p]``.

    Lower envelope of parabolas; ``g`` entries of -1 mean "no site". All
    arithmetic is on integers, so the result is exact.
    """
    n = len(g)
    sites = [p for p in range(n) if g[p] >= 0]
    if not sites:
        out[:] = -1
        return
    v = [sites[0]]
    # boundaries kept as fractions (num, den) to stay exact
    z = []
    for q in sites[1:]:
        while True:
            p = v[-1]
            num = (g[q] + q * q) - (g[p] + p * p)
            den = 2 * (q - p)
            if z and num * z[-1][1] <= z[-1][0] * den:
                v.pop()
                z.pop()
                continue
            break
        v.append(q)
        z.append((num, den))
    k = 0
    for q in range(n):
        while k < len(z) and z[k][0] < q * z[k][1]:
            k += 1
        p = v[k]
        out[q] = (q - p) * (q - p) + g[p]


def squared_distance_transform(grid: BinaryGrid) -> np.ndarray:
    """Integer squared Euclidean distance from every pixel to the foreground.

    Two separable passes: vertical 1-d distances per column, then a lower
    envelope of parabolas along each row.
    """
    mask = grid.mask
    if not mask.any():
        raise ValueError("distance function undefined for empty set")
    h, w = mask.shape
    big = h + w + 1
    col = np.where(mask, 0, big).astype(np.int64)
    for y in range(1, h):
        col[y] = np.minimum(col[y], col[y - 1] + 1)
    for y in range(h - 2, -1, -1):
        col[y] = np.minimum(col[y], col[y + 1] + 1)
    g = np.where(col >= big, -1, col * col)
    out = np.empty((h, w), dtype=np.int64)
    for y in range(h):
        _lower_envelope_1d(g[y].tolist(), out[y])
    return out


def distance_transform(grid: BinaryGrid) -> ScalarField:
    """Euclidean distance to the nearest foreground pixel centre; 0 on the foreground."""
    return ScalarField(np.sqrt(squared_distance_transform(grid).astype(np.float64)))


def hausdorff(a: BinaryGrid, b: BinaryGrid) -> float:
    """Symmetric Hausdorff distance via the max of both directed max-min distances."""
    if a.extent != b.extent:
        raise ValueError(f"extent mismatch: {a.extent} vs {b.extent}")
    da, db = distance_transform(a).values, distance_transform(b).values
    return float(max(da[b.mask].max(), db[a.mask].max()))


def hausdorff_supnorm(a: BinaryGrid, b: BinaryGrid) -> float:
    """Hausdorff distance as the sup-norm distance between the two distance functions."""
    return sup_distance(distance_transform(a), distance_transform(b))


# --- local density -----------------------------------------------------------

def disk_offsets(eps: float) -> np.ndarray:
    """Integer offsets ``(dx, dy)`` with ``dx^2 + dy^2 <= eps^2``."""
    if eps < 1:
        raise ValueError(f"eps must be >= 1 (disk would be a single pixel or empty), got {eps}")
    r = int(math.floor(eps))
    dy, dx = np.mgrid[-r:r + 1, -r:r + 1]
    inside = dx * dx + dy * dy <= eps * eps
    return np.stack([dx[inside], dy[inside]], axis=1)


def disk_size(eps: float) -> int:
    """Pixel count of the discrete disk of radius ``eps``; the discrete ``mu(B_eps)``."""
    return len(disk_offsets(eps))


def _disk_sum(mask: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """For each pixel, the number of ``mask`` pixels at the given offsets (zero outside)."""
    h, w = mask.shape
    src = mask.astype(np.int64)
    out = np.zeros((h, w), dtype=np.int64)
    for dx, dy in offsets.tolist():
        # out[y, x] += src[y + dy, x + dx] where in range
        y0, y1 = max(0, -dy), min(h, h - dy)
        x0, x1 = max(0, -dx), min(w, w - dx)
        if y0 < y1 and x0 < x1:
            out[y0:y1, x0:x1] += src[y0 + dy:y1 + dy, x0 + dx:x1 + dx]
    return out


def density_counts(grid: BinaryGrid, eps: float) -> Tuple[np.ndarray, np.ndarray]:
    """Foreground count and clipped disk size in the ``eps``-disk around every pixel."""
    offsets = disk_offsets(eps)
    hits = _disk_sum(grid.mask, offsets)
    clipped = _disk_sum(np.ones_like(grid.mask), offsets)
    return hits, clipped


def local_density(grid: BinaryGrid, eps: float, clip: bool = True) -> ScalarField:
    """Fraction of the ``eps``-disk around each pixel covered by the foreground.

    With ``clip=True`` the denominator is the disk clipped to the image, so a
    fully-foreground neighbourhood always gives 1. With ``clip=False`` it is
    the full disk size, as in the continuous definition.
    """
    hits, clipped = density_counts(grid, eps)
    denom = clipped if clip else disk_size(eps)
    return ScalarField(hits / denom)


def max_disk_discrepancy(a: BinaryGrid, b: BinaryGrid, eps: float) -> int:
    """``max_x |#(B_eps(x) & a) - #(B_eps(x) & b)|``, the sharper symmetric-difference estimate."""
    if a.extent != b.extent:
        raise ValueError(f"extent mismatch: {a.extent} vs {b.extent}")
    ha, _ = density_counts(a, eps)
    hb, _ = density_counts(b, eps)
    return int(np.abs(ha - hb).max())


def symmetric_difference(a: BinaryGrid, b: BinaryGrid) -> float:
    """Pixel count of the symmetric difference (unit pixel area)."""
    if a.extent != b.extent:
        raise ValueError(f"extent mismatch: {a.extent} vs {b.extent}")
    return float(np.count_nonzero(a.mask ^ b.mask))


def sup_distance(f, g) -> float:
    """Max over pixels of ``|f - g|``; for MultiFields, also max over components."""
    if isinstance(f, MultiField) or isinstance(g, MultiField):
        if not (isinstance(f, MultiField) and isinstance(g, MultiField)):
            raise TypeError("sup_distance needs two ScalarFields or two MultiFields")
        if f.k != g.k:
            raise ValueError(f"component count mismatch: {f.k} vs {g.k}")
        return max(sup_distance(a, b) for a, b in zip(f.components, g.components))
    _check_extents(f, g)
    return float(np.abs(f.values - g.values).max())


def radial_field(extent: Extent, center: Tuple[float, float]) -> ScalarField:
    """``-||p - center||`` at every pixel centre ``p``."""
    w, h = extent
    ys, xs = np.mgrid[0:h, 0:w]
    return ScalarField(-np.hypot(xs - center[0], ys - center[1]))


def centroid(grid: BinaryGrid) -> Tuple[float, float]:
    """Mean foreground pixel centre."""
    ys, xs = np.nonzero(grid.mask)
    if xs.size == 0:
        raise ValueError("centroid undefined for empty set")
    return (float(xs.mean()), float(ys.mean()))


# --- CSV ---------------------------------------------------------------------

def field_to_csv(field: ScalarField) -> str:
    """Row-major CSV, one line per grid row, 17 significant digits."""
    buf = io.StringIO()
    for row in field.values:
        buf.write(",".join(format(float(v), ".17g") for v in row))
        buf.write("\n")
    return buf.getvalue()


def field_from_csv(text: str) -> ScalarField:
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows:
        raise ValueError("empty field CSV")
    values = [[float(tok) for tok in line.split(",")] for line in rows]
    if len({len(r) for r in values}) != 1:
        raise ValueError("ragged field CSV")
    return ScalarField(values)
