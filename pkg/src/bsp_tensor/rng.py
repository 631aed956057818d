"""Portable input generator for ``--input random:SEED``.

The stream is xorshift64* (shifts 12, 25, 27; multiplier
0x2545F4914F6CDD1D) whose state is initialised with one splitmix64 step of
the seed. Each draw keeps the top 53 bits, ``u = (x >> 11) * 2**-53`` in
``[0, 1)``, and maps it to ``2u - 1``. Elements are filled in row-major
order, real part first, then imaginary part (skipped for real inputs).
"""
from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class XorShift64Star:
    def __init__(self, seed: int):
        self.state = splitmix64(seed & _MASK) or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _MASK
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK

    def uniform(self) -> float:
        """Uniform double in ``[-1, 1)``."""
        return 2.0 * ((self.next_u64() >> 11) * 2.0 ** -53) - 1.0


def random_array(shape, seed: int, complex_values: bool = True) -> np.ndarray:
    shape = tuple(shape)
    gen = XorShift64Star(seed)
    n = math.prod(shape)
    out = np.empty(n, dtype=complex)
    for i in range(n):
        re = gen.uniform()
        im = gen.uniform() if complex_values else 0.0
        out[i] = complex(re, im)
    return out.reshape(shape)
