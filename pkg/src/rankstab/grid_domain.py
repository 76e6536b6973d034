"""Pixel-grid domains: binary images, 4-adjacency graphs, PGM I/O and synthetic stars.

Coordinates are ``(x, y)`` with ``0 <= x < width`` and ``0 <= y < height``.
Masks are stored as ``(height, width)`` boolean arrays, row-major, so the
linear pixel index of ``(x, y)`` is ``y * width + x``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Tuple

import numpy as np

Extent = Tuple[int, int]


class PGMError(ValueError):
    """Malformed or unsupported PGM stream."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class BinaryGrid:
    """A rectangular pixel domain with a foreground subset (black pixels)."""

    __slots__ = ("_mask",)

    def __init__(self, mask):
        mask = np.array(mask, dtype=bool, copy=True)
        if mask.ndim != 2 or mask.size == 0:
            raise ValueError("grid extent must be a non-empty 2-d rectangle")
        self._mask = _frozen(mask)

    @classmethod
    def from_pixels(cls, width: int, height: int, foreground: Iterable[Tuple[int, int]] = ()) -> "BinaryGrid":
        if width < 1 or height < 1:
            raise ValueError(f"extent must be positive, got {width}x{height}")
        mask = np.zeros((height, width), dtype=bool)
        for x, y in foreground:
            if not (0 <= x < width and 0 <= y < height):
                raise ValueError(f"pixel ({x}, {y}) outside {width}x{height} extent")
            mask[y, x] = True
        return cls(mask)

    @classmethod
    def empty(cls, width: int, height: int) -> "BinaryGrid":
        return cls.from_pixels(width, height)

    @classmethod
    def full(cls, width: int, height: int) -> "BinaryGrid":
        return cls(np.ones((height, width), dtype=bool))

    @property
    def mask(self) -> np.ndarray:
        return self._mask

    @property
    def width(self) -> int:
        return self._mask.shape[1]

    @property
    def height(self) -> int:
        return self._mask.shape[0]

    @property
    def extent(self) -> Extent:
        return (self.width, self.height)

    @property
    def foreground(self) -> frozenset:
        ys, xs = np.nonzero(self._mask)
        return frozenset(zip(xs.tolist(), ys.tolist()))

    def __len__(self) -> int:
        return int(self._mask.sum())

    def is_empty(self) -> bool:
        return not self._mask.any()

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryGrid):
            return NotImplemented
        return self._mask.shape == other._mask.shape and bool(np.array_equal(self._mask, other._mask))

    def __hash__(self) -> int:
        return hash((self._mask.shape, self._mask.tobytes()))

    def __repr__(self) -> str:
        return f"BinaryGrid({self.width}x{self.height}, {len(self)} foreground)"


@dataclass(frozen=True, eq=False)
class GridGraph:
    """4-adjacency graph on all pixels of a ``width x height`` rectangle.

    ``edges`` is an ``(E, 2)`` array of linear pixel indices with ``i < j``.
    """

    width: int
    height: int
    edges: np.ndarray

    @property
    def extent(self) -> Extent:
        return (self.width, self.height)

    @property
    def n_vertices(self) -> int:
        return self.width * self.height

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def neighbors(self) -> list:
        adj = [[] for _ in range(self.n_vertices)]
        for i, j in self.edges.tolist():
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def degree(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)


def grid_graph(width: int, height: int) -> GridGraph:
    idx = np.arange(width * height).reshape(height, width)
    horiz = np.stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()], axis=1)
    vert = np.stack([idx[:-1, :].ravel(), idx[1:, :].ravel()], axis=1)
    edges = np.concatenate([horiz, vert]).reshape(-1, 2)
    return GridGraph(width, height, _frozen(edges))


def adjacency_graph(grid: BinaryGrid) -> GridGraph:
    """4-neighbour graph on the whole extent of ``grid`` (foreground is ignored)."""
    return grid_graph(grid.width, grid.height)


# --- PGM ---------------------------------------------------------------------

_WS = b" \t\n\r\x0b\x0c"


def _header_tokens(data: bytes, count: int, pos: int):
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and (data[pos] in _WS or data[pos] == ord("#")):
            if data[pos] == ord("#"):
                while pos < n and data[pos] not in b"\r\n":
                    pos += 1
            else:
                pos += 1
        if pos >= n:
            raise PGMError("truncated header", pos)
        start = pos
        while pos < n and data[pos] not in _WS and data[pos] != ord("#"):
            pos += 1
        tok = data[start:pos]
        if not tok.isdigit():
            raise PGMError(f"expected unsigned integer in header, got {tok[:16]!r}", start)
        tokens.append((int(tok), start))
    return tokens, pos


def load_pgm(data: bytes, threshold: int = 128) -> BinaryGrid:
    """Decode a P2 or P5 PGM stream; pixels darker than ``threshold`` are foreground."""
    if not 0 <= threshold <= 255:
        raise ValueError(f"threshold must lie in 0..255, got {threshold}")
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise PGMError(f"unsupported magic number {magic!r}", 0)
    tokens, pos = _header_tokens(data, 3, 2)
    (w, w_at), (h, h_at), (maxval, m_at) = tokens
    if w < 1:
        raise PGMError("width must be positive", w_at)
    if h < 1:
        raise PGMError("height must be positive", h_at)
    if not 1 <= maxval <= 255:
        raise PGMError(f"maxval {maxval} not in 1..255", m_at)
    if pos >= len(data) or data[pos] not in _WS:
        raise PGMError("missing whitespace after maxval", pos)
    pos += 1
    n = w * h
    if magic == b"P5":
        payload = data[pos:pos + n]
        if len(payload) != n:
            raise PGMError(f"payload has {len(payload)} bytes, expected {n}", pos + len(payload))
        values = np.frombuffer(payload, dtype=np.uint8).astype(np.int64)
        bad = np.nonzero(values > maxval)[0]
        if bad.size:
            raise PGMError(f"sample exceeds maxval {maxval}", pos + int(bad[0]))
        if len(data) > pos + n and data[pos + n:].strip(_WS):
            raise PGMError("trailing data after payload", pos + n)
    else:
        text = data[pos:]
        values = []
        for m in re.finditer(rb"#[^\r\n]*|\S+", text):
            tok = m.group()
            if tok.startswith(b"#"):
                continue
            if not tok.isdigit():
                raise PGMError(f"bad sample {tok[:16]!r}", pos + m.start())
            v = int(tok)
            if v > maxval:
                raise PGMError(f"sample exceeds maxval {maxval}", pos + m.start())
            if len(values) == n:
                raise PGMError("more samples than width*height", pos + m.start())
            values.append(v)
        if len(values) != n:
            raise PGMError(f"payload has {len(values)} samples, expected {n}", len(data))
        values = np.asarray(values, dtype=np.int64)
    # rescale so the threshold is always on the 0..255 scale
    gray = values if maxval == 255 else np.rint(values * 255.0 / maxval)
    return BinaryGrid(gray.reshape(h, w) < threshold)


def save_pgm(grid: BinaryGrid) -> bytes:
    """Binary P5 encoding: foreground 0, background 255."""
    header = f"P5\n{grid.width} {grid.height}\n255\n".encode("ascii")
    payload = np.where(grid.mask, 0, 255).astype(np.uint8).tobytes()
    return header + payload


def read_pgm(path, threshold: int = 128) -> BinaryGrid:
    with open(path, "rb") as fh:
        return load_pgm(fh.read(), threshold)


def write_pgm(grid: BinaryGrid, path) -> None:
    with open(path, "wb") as fh:
        fh.write(save_pgm(grid))


# --- synthetic shapes --------------------------------------------------------

_GEOM_TOL = 1e-9


def star_hub_radius(arms: int, arm_width: float) -> float:
    """Smallest hub radius at which neighbouring bars are at least 2 px apart."""
    if arms <= 2:
        return float(arm_width)
    return max(float(arm_width), (arm_width + 2.0) / (2.0 * math.sin(math.pi / arms)))


def make_star(arms: int, arm_length: float, arm_width: float, extent: Extent,
              hub_radius: float | None = None) -> BinaryGrid:
    """A central disk with ``arms`` radial bars at equal angles.

    Bars start at the image centre and reach ``arm_length`` pixels out; the hub
    defaults to the smallest radius keeping bars separated outside it, so that
    removing the hub leaves exactly ``arms`` 4-connected pieces.
    """
    width, height = extent
    if arms < 1:
        raise ValueError("arms must be positive")
    if arm_width <= 0 or arm_length <= 0:
        raise ValueError("arm_length and arm_width must be positive")
    if hub_radius is None:
        hub_radius = star_hub_radius(arms, arm_width)
    if arm_length <= hub_radius + 1:
        raise ValueError(f"arm_length {arm_length} does not reach past hub radius {hub_radius}")
    cx, cy = (width - 1) / 2.0, (height - 1) / 2.0
    reach = math.hypot(arm_length, arm_width / 2.0)
    if reach > min(cx, cy) + _GEOM_TOL:
        raise ValueError(f"star of reach {reach:.3f} overflows {width}x{height} extent")

    ys, xs = np.mgrid[0:height, 0:width]
    dx, dy = xs - cx, ys - cy
    mask = dx * dx + dy * dy <= hub_radius * hub_radius + _GEOM_TOL
    half = arm_width / 2.0
    for j in range(arms):
        theta = 2.0 * math.pi * j / arms
        ux, uy = math.cos(theta), math.sin(theta)
        along = dx * ux + dy * uy
        across = np.abs(-dx * uy + dy * ux)
        mask |= (along >= -_GEOM_TOL) & (along <= arm_length + _GEOM_TOL) & (across <= half + _GEOM_TOL)
    return BinaryGrid(mask)
