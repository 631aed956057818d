"""Linear BSP algorithms: an ordered list of computation and communication
supersteps between two cyclic distributions, plus tools to materialize the
linear map an algorithm computes and to (de)serialize schedules."""
from __future__ import annotations


from enum import Enum

import numpy as np

from .comm import CommRule, IdentityRule, rule_from_dict
from .core import Distribution, ProcessorGrid, Shape
from .errors import ContractError
from .kernels import Kernel, kernel_from_dict

SCHEMA = "bsp-tensor/v1"
SIZE_GUARD = 4096


class StepKind(str, Enum):
    COMPUTATION = "computation"
    COMMUNICATION = "communication"


class ComputationStep:
    """A per-processor linear map, given as a composition of kernels.

    An empty kernel list is the identity on ``in_shape``.
    """

    kind = StepKind.COMPUTATION

    def __init__(self, kernels, in_shape):
        self.kernels = tuple(kernels)
        self.in_shape = Shape(in_shape)
        shape = self.in_shape.dims
        for i, k in enumerate(self.kernels):
            if not isinstance(k, Kernel):
                raise TypeError(f"kernel {i} is not a Kernel: {k!r}")
            if tuple(k.in_shape) != shape:
                raise ContractError(f"kernel {i} ({k.kind}) expects local shape "
                                    f"{tuple(k.in_shape)}, gets {shape}")
            shape = tuple(k.out_shape)
        self.out_shape = Shape(shape)

    def apply_local(self, x: np.ndarray, s: tuple) -> np.ndarray:
        for k in self.kernels:
            x = k.apply(x, s)
        return x

    def local_matrix(self, s: tuple) -> np.ndarray:
        """Matrix of ``f^(s)`` in the row-major local basis."""
        nin = self.in_shape.size
        basis = np.eye(nin, dtype=complex).reshape((nin,) + self.in_shape.dims)
        out = self.apply_local(basis, tuple(s))
        return np.asarray(out).reshape(nin, self.out_shape.size).T

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "in_shape": list(self.in_shape.dims),
                "out_shape": list(self.out_shape.dims),
                "kernels": [k.to_dict() for k in self.kernels]}

    def __repr__(self):
        return f"ComputationStep({[k.kind for k in self.kernels]}, {self.in_shape.dims})"


class CommunicationStep:
    """A permutation of the disjoint union of the local index sets."""

    kind = StepKind.COMMUNICATION

    def __init__(self, rule: CommRule):
        self.rule = rule
        self.in_shape = self.out_shape = rule.local_shape

    @property
    def grid(self) -> ProcessorGrid:
        return self.rule.grid

    def table(self):
        return self.rule.table()

    def to_dict(self, with_table: bool = True) -> dict:
        d = {"kind": self.kind.value, "local_shape": list(self.in_shape.dims),
             "rule": self.rule.to_dict()}
        if with_table:
            proc, loc = self.table()
            d["table"] = {"dest_proc": proc.tolist(), "dest_local": loc.tolist()}
        return d

    def __repr__(self):
        return f"CommunicationStep({self.rule!r})"


def step_from_dict(d: dict):
    if d["kind"] == StepKind.COMPUTATION.value:
        return ComputationStep([kernel_from_dict(k) for k in d["kernels"]], d["in_shape"])
    if d["kind"] == StepKind.COMMUNICATION.value:
        return CommunicationStep(rule_from_dict(d["rule"]))
    raise ValueError(f"unknown step kind {d['kind']!r}")


class LinearBspAlgorithm:
    def __init__(self, in_dist: Distribution, out_dist: Distribution, steps, name: str = ""):
        if in_dist.grid != out_dist.grid:
            raise ContractError(f"input grid {in_dist.grid.dims} != output grid {out_dist.grid.dims}")
        self.in_dist = in_dist
        self.out_dist = out_dist
        self.steps = tuple(steps)
        self.name = name

    @property
    def grid(self) -> ProcessorGrid:
        return self.in_dist.grid

    @property
    def rank(self) -> int:
        return self.grid.rank

    @property
    def signature(self) -> tuple:
        return tuple(st.kind for st in self.steps)

    @classmethod
    def identity(cls, dist: Distribution, name: str = "identity") -> "LinearBspAlgorithm":
        return cls(dist, dist, (), name=name)

    def __repr__(self):
        kinds = ",".join("P" if k is StepKind.COMPUTATION else "M" for k in self.signature)
        return (f"LinearBspAlgorithm({self.name!r}, global={self.in_dist.global_shape.dims}, "
                f"grid={self.grid.dims}, steps=[{kinds}])")


def validate(alg: LinearBspAlgorithm) -> list:
    """Return a list of violations; an empty list means the algorithm is well formed."""
    problems = []
    shape = alg.in_dist.local_shape
    for i, st in enumerate(alg.steps):
        if st.in_shape != shape:
            problems.append(f"step {i}: expects local shape {st.in_shape.dims}, "
                            f"previous step produces {shape.dims}")
        if st.in_shape.rank != alg.rank:
            problems.append(f"step {i}: rank {st.in_shape.rank} != grid rank {alg.rank}")
        if st.kind is StepKind.COMMUNICATION:
            if st.grid != alg.grid:
                problems.append(f"step {i}: rule grid {st.grid.dims} != algorithm grid {alg.grid.dims}")
            else:
                problems.extend(f"step {i}: {msg}" for msg in permutation_violations(st.rule))
        shape = st.out_shape
    if shape != alg.out_dist.local_shape:
        problems.append(f"final local shape {shape.dims} != output distribution local shape "
                        f"{alg.out_dist.local_shape.dims}")
    return problems


def permutation_violations(rule: CommRule) -> list:
    """Check by enumeration that a rule permutes the disjoint union of local index sets."""
    proc, loc = rule.table()
    L = rule.local_shape.size
    n = rule.grid.size * L
    problems = []
    bad = (proc < 0) | (loc < 0)
    if bad.any():
        problems.append(f"out-of-range destination for {int(bad.sum())} source cell(s)")
    counts = np.bincount((proc * L + loc)[~bad], minlength=n)
    if (counts > 1).any():
        problems.append(f"duplicate destination for {int((counts > 1).sum())} cell(s)")
    if (counts == 0).any():
        problems.append(f"uncovered destination for {int((counts == 0).sum())} cell(s)")
    return problems


def apply_global(alg: LinearBspAlgorithm, x, workers: int | None = None) -> np.ndarray:
    """Scatter ``x`` by the input distribution, run, gather by the output distribution."""
    from .engine import DistributedArray, run

    x = np.asarray(x, dtype=complex)
    if x.shape != alg.in_dist.global_shape.dims:
        raise ContractError(f"input shape {x.shape} != algorithm input shape "
                            f"{alg.in_dist.global_shape.dims}")
    y, _ = run(alg, DistributedArray.scatter(alg.in_dist, x), workers=workers)
    return y.gather()


def _guard(n: int):
    if n > SIZE_GUARD:
        raise ValueError(f"index set of size {n} exceeds the enumeration guard {SIZE_GUARD}")


def as_matrix(alg: LinearBspAlgorithm) -> np.ndarray:
    """The linear map computed by ``alg`` in the row-major global basis."""
    nin = alg.in_dist.global_shape.size
    nout = alg.out_dist.global_shape.size
    _guard(max(nin, nout))
    cols = []
    for j in range(nin):
        e = np.zeros(nin, dtype=complex)
        e[j] = 1.0
        cols.append(apply_global(alg, e.reshape(alg.in_dist.global_shape.dims)).ravel())
    return np.array(cols).T.reshape(nout, nin)


def step_matrix(step, grid) -> np.ndarray:
    """Matrix of one superstep on the disjoint union of local index sets.

    Rows and columns are ordered processor-major (row-major over the grid),
    then row-major over the local index.
    """
    grid = ProcessorGrid(grid) if not isinstance(grid, ProcessorGrid) else grid
    P = grid.size
    nin, nout = step.in_shape.size, step.out_shape.size
    _guard(P * max(nin, nout))
    M = np.zeros((P * nout, P * nin), dtype=complex)
    if step.kind is StepKind.COMPUTATION:
        for r, s in enumerate(grid.indices()):
            M[r * nout:(r + 1) * nout, r * nin:(r + 1) * nin] = step.local_matrix(s)
    else:
        proc, loc = step.table()
        M[proc * nout + loc, np.arange(P * nin)] = 1.0
    return M


def as_local_matrix(alg: LinearBspAlgorithm) -> np.ndarray:
    """Product of the superstep matrices, i.e. the map in the local-view basis."""
    n = alg.grid.size * alg.in_dist.local_shape.size
    _guard(n)
    M = np.eye(n, dtype=complex)
    for st in alg.steps:
        M = step_matrix(st, alg.grid) @ M
    return M


def distribution_permutation(dist: Distribution) -> np.ndarray:
    """``perm[flat local-view position] = flat global index`` for a cyclic distribution."""
    P, L = dist.grid.size, dist.local_shape.size
    s = np.array(np.unravel_index(np.repeat(np.arange(P), L), dist.grid.dims))
    k = np.array(np.unravel_index(np.tile(np.arange(L), P), dist.local_shape.dims))
    j = s + k * np.array(dist.grid.dims)[:, None]
    return np.ravel_multi_index(tuple(j), dist.global_shape.dims)


def identity_communication(grid, local_shape) -> CommunicationStep:
    return CommunicationStep(IdentityRule(grid, local_shape))


def schedule_to_dict(alg: LinearBspAlgorithm, with_tables: bool = True) -> dict:
    """Canonical schedule description; permutation tables are guarded by size."""
    steps = []
    for st in alg.steps:
        if st.kind is StepKind.COMMUNICATION:
            n = alg.grid.size * st.in_shape.size
            if with_tables:
                _guard(n)
            steps.append(st.to_dict(with_table=with_tables))
        else:
            steps.append(st.to_dict())
    return {
        "schema": SCHEMA,
        "name": alg.name,
        "grid": list(alg.grid.dims),
        "in_dist": alg.in_dist.to_dict(),
        "out_dist": alg.out_dist.to_dict(),
        "signature": [k.value for k in alg.signature],
        "steps": steps,
    }


def schedule_from_dict(d: dict) -> LinearBspAlgorithm:
    if d.get("schema") != SCHEMA:
        raise ValueError(f"unsupported schema {d.get('schema')!r}")
    return LinearBspAlgorithm(Distribution.from_dict(d["in_dist"]),
                              Distribution.from_dict(d["out_dist"]),
                              [step_from_dict(s) for s in d["steps"]], name=d.get("name", ""))


