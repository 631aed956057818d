"""Primitive local kernels that computation supersteps are built from.

Every kernel is a rank-d object described axis by axis, so the tensor product
of kernels of one family is the concatenation of their axis descriptors. Each
family also knows its identity element for a given local shape; that is what
lets differently shaped factors be padded and combined.

Kernels act on arrays of shape ``batch + in_shape`` (any number of leading
batch axes) and receive the processor multi-index ``s`` because some of them
(the twiddle scalings) depend on it.
"""
from __future__ import annotations

import math

import numpy as np

from .fft import dft_along, half_twiddle, twiddle_table

KERNELS: dict = {}
FACTORS: dict = {}

DENSE_GUARD = 4096


def register(table):
    def deco(cls):
        table[cls.kind] = cls
        return cls
    return deco


def kernel_from_dict(d: dict) -> "Kernel":
    return KERNELS[d["kind"]].from_dict(d)


class Kernel:
    kind = "kernel"

    in_shape: tuple
    out_shape: tuple

    @property
    def rank(self) -> int:
        return len(self.in_shape)

    def apply(self, x: np.ndarray, s: tuple) -> np.ndarray:
        raise NotImplementedError

    @classmethod
    def identity(cls, shape) -> "Kernel":
        raise NotImplementedError

    @classmethod
    def tensor(cls, kernels) -> "Kernel":
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def _split(self, x):
        nb = x.ndim - self.rank
        if nb < 0 or tuple(x.shape[nb:]) != tuple(self.in_shape):
            raise ValueError(f"{self.kind} kernel expects trailing shape {self.in_shape}, "
                             f"got {x.shape}")
        return nb

    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(self.kind)

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()})"


@register(KERNELS)
class Dft(Kernel):
    """``F_m`` on every strided view ``(t : stride : m)``, ``t in [stride]``, per axis.

    Axis descriptor ``(m, stride)`` covers a local extent of ``m * stride``.
    With several axes, ``F_{m_1} ⊗ ... ⊗ F_{m_d}`` is applied to each
    Cartesian product of views. ``(1, L)`` is the identity on that axis.
    """

    kind = "dft"

    def __init__(self, axes):
        self.axes = tuple((int(m), int(b)) for m, b in axes)
        if any(m < 1 or b < 1 for m, b in self.axes):
            raise ValueError(f"bad dft axes {self.axes}")
        self.in_shape = self.out_shape = tuple(m * b for m, b in self.axes)

    def apply(self, x, s):
        nb = self._split(x)
        split = x.shape[:nb] + tuple(v for ax in self.axes for v in ax)
        y = np.asarray(x, dtype=complex).reshape(split)
        for l, (m, _) in enumerate(self.axes):
            if m > 1:
                y = dft_along(y, nb + 2 * l)
        return y.reshape(x.shape)

    @classmethod
    def identity(cls, shape):
        return cls([(1, L) for L in shape])

    @classmethod
    def tensor(cls, kernels):
        return cls([ax for k in kernels for ax in k.axes])

    def to_dict(self):
        return {"kind": self.kind, "axes": [list(a) for a in self.axes]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["axes"])


@register(KERNELS)
class Duplicate(Kernel):
    """Local duplication: ``out[c * L + k] = in[k]`` for ``c in [copies]``, per axis."""

    kind = "duplicate"

    def __init__(self, axes):
        self.axes = tuple((int(c), int(L)) for c, L in axes)
        self.in_shape = tuple(L for _, L in self.axes)
        self.out_shape = tuple(c * L for c, L in self.axes)

    def apply(self, x, s):
        nb = self._split(x)
        for l, (c, _) in enumerate(self.axes):
            if c > 1:
                x = np.concatenate([x] * c, axis=nb + l)
        return x

    @classmethod
    def identity(cls, shape):
        return cls([(1, L) for L in shape])

    @classmethod
    def tensor(cls, kernels):
        return cls([ax for k in kernels for ax in k.axes])

    def to_dict(self):
        return {"kind": self.kind, "axes": [list(a) for a in self.axes]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["axes"])


@register(KERNELS)
class Project(Kernel):
    """Keep the leading ``keep`` cells of an axis of extent ``L``."""

    kind = "project"

    def __init__(self, axes):
        self.axes = tuple((int(keep), int(L)) for keep, L in axes)
        if any(not 0 < keep <= L for keep, L in self.axes):
            raise ValueError(f"bad projection axes {self.axes}")
        self.in_shape = tuple(L for _, L in self.axes)
        self.out_shape = tuple(keep for keep, _ in self.axes)

    def apply(self, x, s):
        self._split(x)
        return x[(Ellipsis,) + tuple(slice(0, keep) for keep, _ in self.axes)]

    @classmethod
    def identity(cls, shape):
        return cls([(L, L) for L in shape])

    @classmethod
    def tensor(cls, kernels):
        return cls([ax for k in kernels for ax in k.axes])

    def to_dict(self):
        return {"kind": self.kind, "axes": [list(a) for a in self.axes]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["axes"])


# -- pointwise scalings -------------------------------------------------------

class AxisFactor:
    """Per-axis diagonal; ``values(s_l)`` gives the scalars for local indices."""

    kind = "factor"
    length: int

    def values(self, s: int) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(self.kind)


@register(FACTORS)
class Ones(AxisFactor):
    kind = "ones"

    def __init__(self, length):
        self.length = int(length)

    def values(self, s):
        return np.ones(self.length)

    def to_dict(self):
        return {"kind": self.kind, "length": self.length}

    @classmethod
    def from_dict(cls, d):
        return cls(d["length"])


@register(FACTORS)
class Twiddle(AxisFactor):
    """``w_n^{k s}`` for local index ``k`` on processor ``s``."""

    kind = "twiddle"

    def __init__(self, n, length):
        self.n, self.length = int(n), int(length)

    def values(self, s):
        return twiddle_table(self.n)[np.arange(self.length) * s]

    def to_dict(self):
        return {"kind": self.kind, "n": self.n, "length": self.length}

    @classmethod
    def from_dict(cls, d):
        return cls(d["n"], d["length"])


@register(FACTORS)
class HalfShift(AxisFactor):
    """``(1/2) exp(-i pi j / 2n)`` at global index ``j = s + k p`` (DCT-II extraction)."""

    kind = "half-shift"

    def __init__(self, n, p):
        self.n, self.p = int(n), int(p)
        self.length = self.n // self.p

    def values(self, s):
        j = s + np.arange(self.length) * self.p
        return 0.5 * half_twiddle(self.n)[j]

    def to_dict(self):
        return {"kind": self.kind, "n": self.n, "p": self.p}

    @classmethod
    def from_dict(cls, d):
        return cls(d["n"], d["p"])


def factor_from_dict(d):
    return FACTORS[d["kind"]].from_dict(d)


@register(KERNELS)
class Scale(Kernel):
    """Diagonal scaling by the outer product of per-axis factors."""

    kind = "scale"

    def __init__(self, factors):
        self.factors = tuple(factors)
        self.in_shape = self.out_shape = tuple(f.length for f in self.factors)

    def table(self, s) -> np.ndarray:
        out = np.ones((), dtype=complex)
        for f, sl in zip(self.factors, s):
            out = np.multiply.outer(out, f.values(sl))
        return out

    def apply(self, x, s):
        self._split(x)
        if all(isinstance(f, Ones) for f in self.factors):
            return x
        return x * self.table(s)

    @classmethod
    def identity(cls, shape):
        return cls([Ones(L) for L in shape])

    @classmethod
    def tensor(cls, kernels):
        return cls([f for k in kernels for f in k.factors])

    def to_dict(self):
        return {"kind": self.kind, "factors": [f.to_dict() for f in self.factors]}

    @classmethod
    def from_dict(cls, d):
        return cls([factor_from_dict(f) for f in d["factors"]])


@register(KERNELS)
class Dense(Kernel):
    """Explicit matrix acting on the row-major flattening of the local array."""

    kind = "dense"

    def __init__(self, matrix, in_shape, out_shape=None):
        self.matrix = np.asarray(matrix, dtype=complex)
        self.in_shape = tuple(int(v) for v in in_shape)
        self.out_shape = tuple(int(v) for v in (out_shape if out_shape is not None else in_shape))
        if self.matrix.shape != (math.prod(self.out_shape), math.prod(self.in_shape)):
            raise ValueError(f"matrix shape {self.matrix.shape} does not map "
                             f"{self.in_shape} -> {self.out_shape}")

    def apply(self, x, s):
        nb = self._split(x)
        flat = np.asarray(x).reshape(x.shape[:nb] + (-1,))
        return (flat @ self.matrix.T).reshape(x.shape[:nb] + self.out_shape)

    @classmethod
    def identity(cls, shape):
        size = math.prod(shape)
        if size > DENSE_GUARD:
            raise ValueError(f"dense identity of size {size} exceeds guard {DENSE_GUARD}")
        return cls(np.eye(size), shape)

    @classmethod
    def tensor(cls, kernels):
        rows = math.prod(math.prod(k.out_shape) for k in kernels)
        cols = math.prod(math.prod(k.in_shape) for k in kernels)
        if max(rows, cols) > DENSE_GUARD:
            raise ValueError(f"Kronecker product {rows}x{cols} exceeds guard {DENSE_GUARD}")
        m = np.ones((1, 1), dtype=complex)
        for k in kernels:
            m = np.kron(m, k.matrix)
        return cls(m, [v for k in kernels for v in k.in_shape],
                   [v for k in kernels for v in k.out_shape])

    def to_dict(self):
        return {"kind": self.kind, "in_shape": list(self.in_shape),
                "out_shape": list(self.out_shape),
                "matrix": [[[float(v.real), float(v.imag)] for v in row] for row in self.matrix]}

    @classmethod
    def from_dict(cls, d):
        m = np.array([[complex(re, im) for re, im in row] for row in d["matrix"]])
        return cls(m.reshape(math.prod(d["out_shape"]), math.prod(d["in_shape"])),
                   d["in_shape"], d["out_shape"])
