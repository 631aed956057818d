"""Index vocabulary: shapes, processor grids, cyclic distributions, strided views.

Multi-indices are plain tuples of ints. Storage is row-major (last axis
fastest) everywhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

MultiIndex = tuple  # tuple[int, ...]


def _as_dims(dims) -> tuple:
    if isinstance(dims, (int, np.integer)):
        dims = (dims,)
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise ValueError("rank must be at least 1")
    if any(d < 1 for d in dims):
        raise ValueError(f"all extents must be >= 1, got {dims}")
    return dims


@dataclass(frozen=True)
class Shape:
    dims: tuple

    def __init__(self, dims):
        object.__setattr__(self, "dims", _as_dims(dims))

    @property
    def rank(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return math.prod(self.dims)

    def contains(self, index: Sequence[int]) -> bool:
        return len(index) == self.rank and all(0 <= i < n for i, n in zip(index, self.dims))

    def flat(self, index: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(index), self.dims))

    def unflat(self, i: int) -> MultiIndex:
        return tuple(int(v) for v in np.unravel_index(i, self.dims))

    def indices(self):
        """All multi-indices in row-major order."""
        return [tuple(int(v) for v in ix) for ix in np.ndindex(*self.dims)]

    def __iter__(self):
        return iter(self.dims)

    def __len__(self):
        return len(self.dims)


class ProcessorGrid(Shape):
    """A rank-d grid of processors ``[p_1] x ... x [p_d]``."""

    @property
    def nprocs(self) -> int:
        return self.size


class DistributionKind(Enum):
    CYCLIC_RANK1 = "cyclic"
    PRODUCT_OF_CYCLIC = "product-cyclic"


@dataclass(frozen=True)
class Distribution:
    """Cyclic distribution of ``global_shape`` over ``grid``, per axis.

    Processor ``s`` holds global index ``s_l + k_l * p_l`` at local index ``k``.
    """

    grid: ProcessorGrid
    global_shape: Shape

    def __post_init__(self):
        if not isinstance(self.grid, ProcessorGrid):
            object.__setattr__(self, "grid", ProcessorGrid(self.grid))
        if not isinstance(self.global_shape, Shape):
            object.__setattr__(self, "global_shape", Shape(self.global_shape))
        if self.grid.rank != self.global_shape.rank:
            raise ValueError(
                f"grid rank {self.grid.rank} != array rank {self.global_shape.rank}")
        for n, p in zip(self.global_shape, self.grid):
            if n % p:
                raise ValueError(f"cyclic distribution needs p | n, got n={n}, p={p}")

    @classmethod
    def cyclic(cls, global_shape, grid) -> "Distribution":
        return cls(ProcessorGrid(grid), Shape(global_shape))

    @property
    def kind(self) -> DistributionKind:
        if self.grid.rank == 1:
            return DistributionKind.CYCLIC_RANK1
        return DistributionKind.PRODUCT_OF_CYCLIC

    @property
    def local_shape(self) -> Shape:
        return Shape(tuple(n // p for n, p in zip(self.global_shape, self.grid)))

    @property
    def rank(self) -> int:
        return self.grid.rank

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "global_shape": list(self.global_shape.dims),
                "grid": list(self.grid.dims)}

    @classmethod
    def from_dict(cls, d: dict) -> "Distribution":
        return cls.cyclic(d["global_shape"], d["grid"])


def _check_in(shape: Shape, index, what: str):
    index = tuple(index)
    if not shape.contains(index):
        raise IndexError(f"{what} {index} out of range for extents {shape.dims}")
    return index


def cyclic_global(dist: Distribution, s, k) -> MultiIndex:
    """Global index of local cell ``k`` on processor ``s``."""
    s = _check_in(dist.grid, s, "processor")
    k = _check_in(dist.local_shape, k, "local index")
    return tuple(sl + kl * pl for sl, kl, pl in zip(s, k, dist.grid))


def cyclic_local(dist: Distribution, j) -> tuple:
    """Inverse of :func:`cyclic_global`: returns ``(s, k)``."""
    j = _check_in(dist.global_shape, j, "global index")
    s = tuple(jl % pl for jl, pl in zip(j, dist.grid))
    k = tuple(jl // pl for jl, pl in zip(j, dist.grid))
    return s, k


def local_slices(dist: Distribution, s) -> tuple:
    """Slices selecting processor ``s``'s cells out of a global array."""
    s = _check_in(dist.grid, s, "processor")
    return tuple(slice(sl, None, pl) for sl, pl in zip(s, dist.grid))


@dataclass(frozen=True)
class StridedView:
    """``v(a:b:c)``: ``count`` elements starting at ``start`` with ``stride``."""

    start: int
    stride: int
    count: int

    def __post_init__(self):
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if self.count < 0 or self.start < 0:
            raise ValueError("start and count must be non-negative")

    def check(self, extent: int):
        if self.count and self.start + (self.count - 1) * self.stride >= extent:
            raise IndexError(f"view {self} exceeds axis extent {extent}")

    def as_slice(self) -> slice:
        return slice(self.start, self.start + (self.count - 1) * self.stride + 1, self.stride) \
            if self.count else slice(0, 0)


def strided_read(local, view) -> np.ndarray:
    """Read a strided subarray; ``view`` is one StridedView or one per axis."""
    local = np.asarray(local)
    views = (view,) if isinstance(view, StridedView) else tuple(view)
    if len(views) != local.ndim:
        raise IndexError(f"{len(views)} views for a rank-{local.ndim} array")
    for v, extent in zip(views, local.shape):
        v.check(extent)
    return local[tuple(v.as_slice() for v in views)].copy()


def product_grid(grids: Sequence) -> ProcessorGrid:
    """Concatenate rank-1 grids ``[p_1], ..., [p_d]`` into ``[p_1] x ... x [p_d]``."""
    grids = list(grids)
    if not grids:
        raise ValueError("product_grid needs at least one grid")
    dims = []
    for g in grids:
        g = g if isinstance(g, ProcessorGrid) else ProcessorGrid(g)
        if g.rank != 1:
            raise ValueError(f"product_grid expects rank-1 grids, got {g.dims}")
        dims.extend(g.dims)
    return ProcessorGrid(tuple(dims))
