"""Concrete linear BSP algorithms: parallel four-step FFT and DCT-II."""
from __future__ import annotations

import numpy as np

from .comm import CommRule, DctReverse, FftTranspose, register as register_rule
from .core import Distribution, ProcessorGrid, Shape
from .errors import DivisibilityError
from .fft import local_dft, twiddle_table  # noqa: F401  (local_dft re-exported)
from .kernels import KERNELS, Dft, Duplicate, Kernel, Project, Scale, HalfShift, Twiddle
from .linear_bsp import CommunicationStep, ComputationStep, LinearBspAlgorithm
from .tensor import tensor


def _require_fft(n: int, p: int):
    if n < 1 or p < 1 or n % (p * p):
        raise DivisibilityError("p² | n", f"n={n}, p={p}")


def _require_dct(n: int, p: int):
    if n < 1 or p < 1 or (2 * n) % (p * p):
        raise DivisibilityError("p² | 2n", f"n={n}, p={p}")
    if n % p:
        raise DivisibilityError("p | n", f"n={n}, p={p}")


def fft_admissible(n: int, p: int) -> bool:
    return n >= 1 and p >= 1 and n % (p * p) == 0


def dct_admissible(n: int, p: int) -> bool:
    return n >= 1 and p >= 1 and (2 * n) % (p * p) == 0 and n % p == 0


def _fft_supersteps(n: int, p: int) -> list:
    m = n // p
    return [
        # local F_{n/p}, then x_k <- w_n^{ks} x_k
        ComputationStep([Dft([(m, 1)]), Scale([Twiddle(n, m)])], (m,)),
        CommunicationStep(FftTranspose(n, p)),
        # F_p on every view y(t : n/p^2 : n/p)
        ComputationStep([Dft([(p, n // (p * p))])], (m,)),
    ]


def make_fft_rank1(n: int, p: int) -> LinearBspAlgorithm:
    """Parallel four-step FFT of length ``n`` on ``p`` processors, cyclic in and out."""
    _require_fft(n, p)
    dist = Distribution.cyclic(n, p)
    return LinearBspAlgorithm(dist, dist, _fft_supersteps(n, p), name=f"fft({n},{p})")


def make_fft_rankd(shape, grid) -> LinearBspAlgorithm:
    """Rank-d FFT obtained by tensoring rank-1 four-step algorithms."""
    shape, grid = Shape(shape), ProcessorGrid(grid)
    _check_ranks(shape, grid)
    return tensor([make_fft_rank1(n, p) for n, p in zip(shape, grid)])


def _check_ranks(shape, grid):
    if shape.rank != grid.rank:
        raise ValueError(f"shape rank {shape.rank} != grid rank {grid.rank}")


# -- hand-written rank-d reference -------------------------------------------

@register_rule
class VectorTranspose(CommRule):
    """Rank-d put ``X^(s)(k : p : n/p) -> Y^(k mod p)[s n/p^2 : (s+1) n/p^2]``
    written directly on index vectors."""

    kind = "vector-transpose"

    def __init__(self, shape, grid):
        self.shape = Shape(shape)
        self.grid = ProcessorGrid(grid)
        self.local_shape = Shape(tuple(n // p for n, p in zip(self.shape, self.grid)))

    def map(self, s, k):
        n = np.array(self.shape.dims)
        p = np.array(self.grid.dims)
        return k % p, s * (n // (p * p)) + k // p

    def to_dict(self):
        return {"kind": self.kind, "shape": list(self.shape.dims), "grid": list(self.grid.dims)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["shape"], d["grid"])


class ProductTwiddle(Kernel):
    """``X^(s)[k] *= prod_l w_{n_l}^{k_l s_l}`` evaluated on the whole local block."""

    kind = "product-twiddle"

    def __init__(self, shape, grid):
        self.shape = tuple(int(v) for v in shape)
        self.grid = tuple(int(v) for v in grid)
        self.in_shape = self.out_shape = tuple(n // p for n, p in zip(self.shape, self.grid))

    def apply(self, x, s):
        self._split(x)
        k = np.indices(self.in_shape)
        w = np.ones(self.in_shape, dtype=complex)
        for l, n in enumerate(self.shape):
            w = w * twiddle_table(n)[k[l] * s[l]]
        return x * w

    def to_dict(self):
        return {"kind": self.kind, "shape": list(self.shape), "grid": list(self.grid)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["shape"], d["grid"])


KERNELS[ProductTwiddle.kind] = ProductTwiddle


def make_fft_rankd_reference(shape, grid) -> LinearBspAlgorithm:
    """Rank-d four-step FFT written out by hand, without the tensor combinator."""
    shape, grid = Shape(shape), ProcessorGrid(grid)
    _check_ranks(shape, grid)
    for n, p in zip(shape, grid):
        _require_fft(n, p)
    local = tuple(n // p for n, p in zip(shape, grid))
    dist = Distribution(grid, shape)
    steps = [
        ComputationStep([Dft([(m, 1) for m in local]),
                         ProductTwiddle(shape.dims, grid.dims)], local),
        CommunicationStep(VectorTranspose(shape.dims, grid.dims)),
        ComputationStep([Dft([(p, n // (p * p)) for n, p in zip(shape, grid)])], local),
    ]
    return LinearBspAlgorithm(dist, dist, steps, name=f"fft-reference({shape.dims},{grid.dims})")


# -- DCT-II --------------------------------------------------------------------

def dct_comm_maps(n: int, p: int):
    """The two-branch ``(psi, rho)`` of the DCT-II reversal superstep."""
    if n % p:
        raise ValueError(f"dct reversal needs p | n, got n={n}, p={p}")
    half = n // p

    def psi(s, k):
        return s if k < half else p - 1 - s

    def rho(s, k):
        return k if k < half else 3 * half - 1 - k

    return psi, rho


def make_dct2_rank1(n: int, p: int) -> LinearBspAlgorithm:
    """Parallel DCT-II through symmetric extension and a length-2n four-step FFT.

    Supersteps: local duplication, reversal of the second copy, the three FFT
    supersteps, then projection onto the first half with the half-step shift.
    """
    _require_dct(n, p)
    m = n // p
    dist = Distribution.cyclic(n, p)
    steps = [ComputationStep([Duplicate([(2, m)])], (m,)),
             CommunicationStep(DctReverse(n, p))]
    steps += _fft_supersteps(2 * n, p)
    steps.append(ComputationStep([Project([(m, 2 * m)]), Scale([HalfShift(n, p)])], (2 * m,)))
    return LinearBspAlgorithm(dist, dist, steps, name=f"dct2({n},{p})")


def make_dct2_rankd(shape, grid) -> LinearBspAlgorithm:
    """Rank-d DCT-II as the tensor product of rank-1 parallel DCT-II algorithms."""
    shape, grid = Shape(shape), ProcessorGrid(grid)
    _check_ranks(shape, grid)
    return tensor([make_dct2_rank1(n, p) for n, p in zip(shape, grid)], pad=True)


def admissible_grids(shape, transform: str = "fft") -> list:
    """Every grid ``(p_1, ..., p_d)`` satisfying the transform's divisibility rules."""
    ok = fft_admissible if transform == "fft" else dct_admissible
    per_axis = [[p for p in range(1, n + 1) if ok(n, p)] for n in shape]
    grids = [()]
    for choices in per_axis:
        grids = [g + (p,) for g in grids for p in choices]
    return grids


def build(transform: str, shape, grid, source: str = "combinator") -> LinearBspAlgorithm:
    """Construct an algorithm by name; the CLI's single entry point."""
    shape, grid = Shape(shape), ProcessorGrid(grid)
    _check_ranks(shape, grid)
    if transform == "fft":
        if source == "reference":
            return make_fft_rankd_reference(shape, grid)
        if shape.rank == 1:
            return make_fft_rank1(shape.dims[0], grid.dims[0])
        return make_fft_rankd(shape, grid)
    if transform == "dct":
        if source == "reference":
            raise ValueError("no hand-written reference exists for the DCT")
        if shape.rank == 1:
            return make_dct2_rank1(shape.dims[0], grid.dims[0])
        return make_dct2_rankd(shape, grid)
    if transform == "identity":
        return LinearBspAlgorithm.identity(Distribution(grid, shape))
    raise ValueError(f"unknown transform {transform!r}")
