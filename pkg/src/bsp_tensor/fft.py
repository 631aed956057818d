"""Sequential DFT kernels and root-of-unity tables."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

_RADICES = (2, 3, 5)


class TwiddleTable:
    """Powers ``w_n^t = exp(-2 pi i t / n)`` for ``t in [n]``."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError(f"table length must be >= 1, got {n}")
        self.n = n
        t = np.arange(n)
        ent = np.exp(-2j * np.pi * t / n)
        ent[0] = 1.0
        # pin the exactly representable quarter turns
        if n % 4 == 0:
            ent[n // 4] = -1j
            ent[3 * n // 4] = 1j
        if n % 2 == 0:
            ent[n // 2] = -1.0
        ent.setflags(write=False)
        self.entries = ent

    def __getitem__(self, idx):
        return self.entries[np.asarray(idx) % self.n]

    def __len__(self):
        return self.n


class HalfTwiddle:
    """Half-step powers ``exp(-i pi k / 2n)`` for ``k in [n]``."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError(f"table length must be >= 1, got {n}")
        self.n = n
        k = np.arange(n)
        ent = np.exp(-1j * np.pi * k / (2 * n))
        ent[0] = 1.0
        ent.setflags(write=False)
        self.entries = ent

    def __getitem__(self, idx):
        return self.entries[idx]

    def __len__(self):
        return self.n


@lru_cache(maxsize=None)
def twiddle_table(n: int) -> TwiddleTable:
    return TwiddleTable(n)


@lru_cache(maxsize=None)
def half_twiddle(n: int) -> HalfTwiddle:
    return HalfTwiddle(n)


def _smallest_radix(n: int):
    for r in _RADICES:
        if n % r == 0:
            return r
    return None


def _direct(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    w = twiddle_table(n)
    j = np.arange(n)
    return x @ w[np.outer(j, j)].T


def _fft_last(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    if n == 1:
        return x.copy()
    r = _smallest_radix(n)
    if r is None:
        return _direct(x)
    m = n // r
    # decimation in time: sub-transforms of the r interleaved subsequences
    subs = np.stack([_fft_last(x[..., j::r]) for j in range(r)], axis=-2)  # (..., r, m)
    w = twiddle_table(n)
    k = np.arange(m)
    jj = np.arange(r)
    subs = subs * w[np.outer(jj, k)]
    # X[k + q m] = sum_j w_r^{jq} (w_n^{jk} Y_j[k])
    wr = twiddle_table(r)
    butterfly = wr[np.outer(jj, jj)]  # [q, j]
    out = np.einsum("qj,...jk->...qk", butterfly, subs)
    return out.reshape(x.shape[:-1] + (n,))


def dft_along(x: np.ndarray, axis: int) -> np.ndarray:
    """Unnormalized DFT of ``x`` along ``axis``, batched over all other axes."""
    x = np.asarray(x, dtype=complex)
    moved = np.moveaxis(x, axis, -1)
    return np.moveaxis(_fft_last(moved), -1, axis)


def dft_direct_along(x: np.ndarray, axis: int) -> np.ndarray:
    """O(n^2) path of :func:`dft_along`, used to cross-check the radix path."""
    x = np.asarray(x, dtype=complex)
    return np.moveaxis(_direct(np.moveaxis(x, axis, -1)), -1, axis)


def local_dft(x, n: int | None = None) -> np.ndarray:
    """Sequential DFT of a length-``n`` vector.

    Mixed-radix Cooley-Tukey over the factors 2, 3 and 5; any remaining
    cofactor is transformed by direct summation.
    """
    x = np.asarray(x, dtype=complex)
    if n is None:
        n = x.shape[-1]
    if n == 0:
        raise ValueError("DFT length must be positive")
    if x.ndim != 1 or x.shape[0] != n:
        raise ValueError(f"expected a vector of length {n}, got shape {x.shape}")
    return _fft_last(x)
