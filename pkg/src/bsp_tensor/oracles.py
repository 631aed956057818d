"""Brute-force reference transforms.

Everything here is deliberately naive (plain sums, no fast algorithms) so it
stays independent of the code it is used to check.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def _root_powers(n: int) -> np.ndarray:
    # exp(-2 pi i t / n) for t in [n]; callers index with (j*k) mod n
    t = np.arange(n)
    return np.exp(-2j * np.pi * t / n)


def dft_oracle(x) -> np.ndarray:
    """Unnormalized DFT ``y_k = sum_j x_j w_n^{jk}`` by direct summation."""
    x = np.asarray(x, dtype=complex).ravel()
    n = x.size
    if n == 0:
        return x.copy()
    w = _root_powers(n)
    y = np.empty(n, dtype=complex)
    for k in range(n):
        acc = 0j
        for j in range(n):
            acc += x[j] * w[(j * k) % n]
        y[k] = acc
    return y


def dft_rankd_oracle(X) -> np.ndarray:
    """Multidimensional DFT as literal nested sums over every index."""
    X = np.asarray(X, dtype=complex)
    shape = X.shape
    roots = [_root_powers(n) for n in shape]
    Y = np.empty(shape, dtype=complex)
    # outer loop over output indices; inner sum over all input indices,
    # vectorized across j only for speed
    grids = np.indices(shape).reshape(len(shape), -1)
    flat = X.ravel()
    for k in itertools.product(*(range(n) for n in shape)):
        factor = np.ones(flat.size, dtype=complex)
        for ax, (kl, n) in enumerate(zip(k, shape)):
            factor = factor * roots[ax][(grids[ax] * kl) % n]
        Y[k] = np.sum(flat * factor)
    return Y


def dct2_oracle(x) -> np.ndarray:
    """DCT-II ``y_k = sum_j x_j cos((2j+1) k pi / 2n)`` by direct summation."""
    x = np.asarray(x)
    n = x.size
    y = np.zeros(n, dtype=np.result_type(x.dtype, float))
    for k in range(n):
        for j in range(n):
            y[k] += x.flat[j] * math.cos((2 * j + 1) * k * math.pi / (2 * n))
    return y


def dct2_rankd_oracle(X) -> np.ndarray:
    """Rank-d DCT-II: nested sum with a product of per-axis cosine factors."""
    X = np.asarray(X)
    shape = X.shape
    grids = np.indices(shape).reshape(len(shape), -1)
    flat = X.ravel()
    Y = np.zeros(shape, dtype=np.result_type(X.dtype, float))
    for k in itertools.product(*(range(n) for n in shape)):
        factor = np.ones(flat.size)
        for ax, (kl, n) in enumerate(zip(k, shape)):
            factor = factor * np.cos((2 * grids[ax] + 1) * kl * np.pi / (2 * n))
        Y[k] = np.sum(flat * factor)
    return Y


def dft_matrix(n: int) -> np.ndarray:
    w = _root_powers(n)
    j = np.arange(n)
    return w[np.outer(j, j) % n]


def dct2_matrix(n: int) -> np.ndarray:
    j = np.arange(n)
    return np.cos(np.outer(j, 2 * j + 1) * np.pi / (2 * n))


def kron_apply(mats, X) -> np.ndarray:
    """Apply ``mats[0] ⊗ ... ⊗ mats[d-1]`` to a rank-d array, one axis at a time.

    Matrix ``l`` acts along axis ``l``; for a row-major flattening this equals
    the dense Kronecker product (axis 0 slowest) applied to ``X.ravel()``.
    """
    mats = [np.asarray(m) for m in mats]
    X = np.asarray(X)
    if X.ndim != len(mats):
        raise ValueError(f"{len(mats)} matrices for a rank-{X.ndim} array")
    Y = X
    for ax, m in enumerate(mats):
        if m.ndim != 2 or m.shape[1] != Y.shape[ax]:
            raise ValueError(f"matrix {ax} of shape {m.shape} does not fit axis extent {Y.shape[ax]}")
        Y = np.moveaxis(np.tensordot(m, Y, axes=([1], [ax])), 0, ax)
    return Y


def kron_matrix(mats) -> np.ndarray:
    """Dense Kronecker product, first factor slowest."""
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, np.asarray(m))
    return out
