"""Communication rules: closed-form ``(psi, rho)`` maps on the local index set.

A rule sends local cell ``k`` of processor ``s`` to cell ``rho(s, k)`` of
processor ``psi(s, k)``. Rules are vectorized: ``map`` takes integer arrays of
shape ``(N, rank)`` and returns destinations of the same shape. Enumerating
the map over every ``(s, k)`` (:meth:`CommRule.table`) is the single source
of truth for both validation and execution.
"""
from __future__ import annotations

import numpy as np

from .core import ProcessorGrid, Shape

RULES: dict = {}


def register(cls):
    RULES[cls.kind] = cls
    return cls


def rule_from_dict(d: dict) -> "CommRule":
    return RULES[d["kind"]].from_dict(d)


def enumerate_domain(grid: Shape, local_shape: Shape):
    """All ``(s, k)`` pairs, processor-major, both row-major; shape ``(N, rank)``."""
    P, L = grid.size, local_shape.size
    s = np.array(np.unravel_index(np.repeat(np.arange(P), L), grid.dims)).T
    k = np.array(np.unravel_index(np.tile(np.arange(L), P), local_shape.dims)).T
    return s.reshape(P * L, grid.rank), k.reshape(P * L, grid.rank)


class CommRule:
    kind = "rule"

    grid: ProcessorGrid
    local_shape: Shape

    @property
    def rank(self) -> int:
        return self.grid.rank

    def map(self, s: np.ndarray, k: np.ndarray):
        raise NotImplementedError

    def dest(self, s, k) -> tuple:
        """Scalar convenience: ``(psi(s, k), rho(s, k))`` as tuples."""
        s = np.atleast_1d(np.asarray(s, dtype=np.int64))
        k = np.atleast_1d(np.asarray(k, dtype=np.int64))
        ds, dk = self.map(s[None, :], k[None, :])
        return tuple(int(v) for v in ds[0]), tuple(int(v) for v in dk[0])

    def table(self):
        """Flat destination processor and local index for every flat source cell."""
        s, k = enumerate_domain(self.grid, self.local_shape)
        ds, dk = self.map(s, k)
        return self.flatten(ds, dk)

    def flatten(self, ds, dk):
        """Row-major flat indices; out-of-range entries become -1."""
        ok = np.all((ds >= 0) & (ds < np.array(self.grid.dims)), axis=1)
        ok &= np.all((dk >= 0) & (dk < np.array(self.local_shape.dims)), axis=1)
        proc = np.full(len(ds), -1, dtype=np.int64)
        loc = np.full(len(dk), -1, dtype=np.int64)
        if ok.any():
            proc[ok] = np.ravel_multi_index(tuple(ds[ok].T), self.grid.dims)
            loc[ok] = np.ravel_multi_index(tuple(dk[ok].T), self.local_shape.dims)
        return proc, loc

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(self.kind)

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()})"


@register
class IdentityRule(CommRule):
    kind = "identity"

    def __init__(self, grid, local_shape):
        self.grid = ProcessorGrid(grid)
        self.local_shape = Shape(local_shape)

    def map(self, s, k):
        return s.copy(), k.copy()

    def to_dict(self):
        return {"kind": self.kind, "grid": list(self.grid.dims),
                "local_shape": list(self.local_shape.dims)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["grid"], d["local_shape"])


@register
class FftTranspose(CommRule):
    """Four-step FFT redistribution: ``psi = k mod p``, ``rho = s n/p^2 + k div p``."""

    kind = "fft-transpose"

    def __init__(self, n, p):
        self.n, self.p = int(n), int(p)
        if self.n % (self.p * self.p):
            raise ValueError(f"fft transpose needs p^2 | n, got n={n}, p={p}")
        self.grid = ProcessorGrid(self.p)
        self.local_shape = Shape(self.n // self.p)

    def map(self, s, k):
        p, block = self.p, self.n // (self.p * self.p)
        return k % p, s * block + k // p

    def to_dict(self):
        return {"kind": self.kind, "n": self.n, "p": self.p}

    @classmethod
    def from_dict(cls, d):
        return cls(d["n"], d["p"])


@register
class DctReverse(CommRule):
    """``id ⊕ r`` on the doubled local arrays of the DCT-II signal extension.

    The first ``n/p`` cells stay put; cell ``k >= n/p`` goes to processor
    ``p-1-s`` at local index ``3n/p - 1 - k``.
    """

    kind = "dct-reverse"

    def __init__(self, n, p):
        self.n, self.p = int(n), int(p)
        if self.n % self.p:
            raise ValueError(f"dct reversal needs p | n, got n={n}, p={p}")
        self.grid = ProcessorGrid(self.p)
        self.local_shape = Shape(2 * self.n // self.p)

    def map(self, s, k):
        half = self.n // self.p
        second = k >= half
        ds = np.where(second, self.p - 1 - s, s)
        dk = np.where(second, 3 * half - 1 - k, k)
        return ds, dk

    def to_dict(self):
        return {"kind": self.kind, "n": self.n, "p": self.p}

    @classmethod
    def from_dict(cls, d):
        return cls(d["n"], d["p"])


@register
class TableRule(CommRule):
    """Explicit destination tables indexed by flat ``(s, k)``; for ad-hoc maps."""

    kind = "table"

    def __init__(self, grid, local_shape, dest_proc, dest_local):
        self.grid = ProcessorGrid(grid)
        self.local_shape = Shape(local_shape)
        n = self.grid.size * self.local_shape.size
        self.dest_proc = np.asarray(dest_proc, dtype=np.int64).reshape(n)
        self.dest_local = np.asarray(dest_local, dtype=np.int64).reshape(n)

    def map(self, s, k):
        src = (np.ravel_multi_index(tuple(s.T), self.grid.dims) * self.local_shape.size
               + np.ravel_multi_index(tuple(k.T), self.local_shape.dims))
        dp, dl = self.dest_proc[src], self.dest_local[src]
        # unravel tolerates nothing out of range, so clip and let flatten() flag it
        bad_p = (dp < 0) | (dp >= self.grid.size)
        bad_l = (dl < 0) | (dl >= self.local_shape.size)
        ds = np.array(np.unravel_index(np.where(bad_p, 0, dp), self.grid.dims)).T
        dk = np.array(np.unravel_index(np.where(bad_l, 0, dl), self.local_shape.dims)).T
        ds[bad_p] = -1
        dk[bad_l] = -1
        return ds.reshape(len(src), self.rank), dk.reshape(len(src), self.rank)

    def to_dict(self):
        return {"kind": self.kind, "grid": list(self.grid.dims),
                "local_shape": list(self.local_shape.dims),
                "dest_proc": self.dest_proc.tolist(), "dest_local": self.dest_local.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["grid"], d["local_shape"], d["dest_proc"], d["dest_local"])


@register
class ProductRule(CommRule):
    """Componentwise product ``(psi_1 x ... x psi_d, rho_1 x ... x rho_d)``."""

    kind = "product"

    def __init__(self, factors):
        flat = []
        for f in factors:
            flat.extend(f.factors if isinstance(f, ProductRule) else [f])
        if not flat:
            raise ValueError("product of zero rules")
        self.factors = tuple(flat)
        self.grid = ProcessorGrid(tuple(d for f in flat for d in f.grid.dims))
        self.local_shape = Shape(tuple(d for f in flat for d in f.local_shape.dims))

    def map(self, s, k):
        ds, dk = np.empty_like(s), np.empty_like(k)
        col = 0
        for f in self.factors:
            r = f.rank
            fs, fk = f.map(s[:, col:col + r], k[:, col:col + r])
            ds[:, col:col + r] = np.reshape(fs, (len(s), r))
            dk[:, col:col + r] = np.reshape(fk, (len(k), r))
            col += r
        return ds, dk

    def to_dict(self):
        return {"kind": self.kind, "factors": [f.to_dict() for f in self.factors]}

    @classmethod
    def from_dict(cls, d):
        return cls([rule_from_dict(f) for f in d["factors"]])
