"""Uniform cube partitions of [0, 1]^d and their split into work tiles."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    cells_per_axis: int
    dimension: int = 3

    def __post_init__(self):
        if self.cells_per_axis < 1:
            raise ValueError("cells_per_axis must be >= 1")
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")

    @property
    def side(self) -> float:
        """Cube side ``1/N`` (one rounding)."""
        return 1.0 / self.cells_per_axis

    @property
    def cell_count(self) -> int:
        return self.cells_per_axis ** self.dimension

    @property
    def cell_volume(self) -> float:
        """``1/N^d`` computed with one rounding from the exact integer ``N^d``."""
        return 1.0 / self.cell_count

    def full_tile(self) -> "Tile":
        return Tile(tuple((0, self.cells_per_axis) for _ in range(self.dimension)))


@dataclass(frozen=True)
class Tile:
    """Half-open index ranges, one ``(start, stop)`` pair per axis."""

    ranges: tuple[tuple[int, int], ...]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(b - a for a, b in self.ranges)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    def indices(self) -> Iterator[tuple[int, ...]]:
        """All cell indices in C order (last axis fastest)."""
        grids = np.indices(self.shape).reshape(len(self.ranges), -1).T
        offset = np.array([a for a, _ in self.ranges])
        for row in grids:
            yield tuple(int(v) for v in row + offset)


def midpoint(spec: GridSpec, index: Sequence[int]) -> tuple[float, ...]:
    """Cube centre ``(2 i + 1) / (2 N)`` per coordinate, one division each."""
    if len(index) != spec.dimension:
        raise ValueError(f"index must have length {spec.dimension}")
    n = spec.cells_per_axis
    for i in index:
        if not 0 <= i < n:
            raise ValueError(f"index {tuple(index)} out of range for N={n}")
    return tuple((2 * i + 1) / (2 * n) for i in index)


def _split_range(start: int, stop: int, pieces: int) -> list[tuple[int, int]]:
    q, r = divmod(stop - start, pieces)
    out, a = [], start
    for j in range(pieces):
        b = a + q + (1 if j < r else 0)
        out.append((a, b))
        a = b
    return out


def _split(ranges: tuple[tuple[int, int], ...], count: int) -> list[Tile]:
    extents = [b - a for a, b in ranges]
    if count <= 1 or max(extents) <= 1:
        return [Tile(ranges)]
    axis = extents.index(max(extents))  # first longest axis
    pieces = min(count, extents[axis])
    q, r = divmod(count, pieces)
    tiles: list[Tile] = []
    for j, sub in enumerate(_split_range(*ranges[axis], pieces)):
        child = ranges[:axis] + (sub,) + ranges[axis + 1:]
        tiles.extend(_split(child, q + (1 if j < r else 0)))
    return tiles


def tiles(spec: GridSpec, target_count: int) -> list[Tile]:
    """Partition the index box into at most ``target_count`` tiles in canonical order.

    Slabs along the first axis; a slab that still owes more tiles is split again
    along its longest axis. The result depends only on ``(spec, target_count)``.
    """
    if target_count < 1:
        raise ValueError("target_count must be >= 1")
    return _split(spec.full_tile().ranges, target_count)
