"""Shared tile plumbing: kernel operands and a deterministic worker pool."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

from .grid import GridSpec, Tile
from .trigpoly import TrigEigenfunction, midpoint_residues, term_arrays, wave_tables

T = TypeVar("T")

WORKERS_ENV = "TORUS_LP_WORKERS"


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


class MidpointField:
    """Everything a kernel needs to evaluate ``f`` on the midpoints of ``spec``."""

    def __init__(self, f: TrigEigenfunction, spec: GridSpec):
        if f.dimension != spec.dimension:
            raise ValueError(
                f"eigenfunction dimension {f.dimension} != grid dimension {spec.dimension}")
        self.f = f
        self.spec = spec
        self.two_n = 2 * spec.cells_per_axis
        self.residues = midpoint_residues(f, spec.cells_per_axis)
        self.sin_tab, self.cos_tab = wave_tables(spec.cells_per_axis)
        self.coefs, self.is_sin = term_arrays(f)

    def operands(self, tile: Tile) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Residue blocks ``(outer, middle, inner)`` for the (P, J, K) view of ``tile``."""
        res, two_n = self.residues, self.two_n
        n_terms = res.shape[0]
        d = self.spec.dimension

        def axis(a):
            lo, hi = tile.ranges[a]
            return np.ascontiguousarray(res[:, a, lo:hi])

        zero = np.zeros((n_terms, 1), dtype=np.int64)
        inner = axis(d - 1)
        middle = axis(d - 2) if d >= 2 else zero
        if d <= 2:
            return zero, middle, inner
        outer = zero
        for a in range(d - 2):
            block = axis(a)
            outer = (outer[:, :, None] + block[:, None, :]) % two_n
            outer = outer.reshape(n_terms, -1)
        return np.ascontiguousarray(outer), middle, inner

    def kernel_args(self, tile: Tile) -> tuple:
        o, m, i = self.operands(tile)
        return (o, m, i, self.sin_tab, self.cos_tab, self.coefs, self.is_sin, self.two_n)


def map_tiles(fn: Callable[[Tile], T], tile_list: Sequence[Tile], workers: int | None = None) -> list[T]:
    """Apply ``fn`` to every tile; results come back in tile order whatever the worker count."""
    workers = workers or default_workers()
    if workers <= 1 or len(tile_list) <= 1:
        return [fn(t) for t in tile_list]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tile_list))
