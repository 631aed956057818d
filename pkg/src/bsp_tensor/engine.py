"""Superstep execution engine.

Processors are logical workers inside one process. Within a superstep the
workers may run on a thread pool; every worker only writes its own output
(computation) or its own put list (communication), and put lists are merged
in a canonical order at the barrier, so results do not depend on scheduling.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import Distribution, local_slices
from .errors import ContractError, ScheduleError
from .linear_bsp import CommunicationStep, ComputationStep, LinearBspAlgorithm, StepKind


@dataclass(frozen=True)
class PutRecord:
    src_proc: tuple
    dst_proc: tuple
    dst_index: tuple
    value: complex


class DistributedArray:
    """Local arrays ``X^(s)``, one per processor in row-major grid order."""

    def __init__(self, dist: Distribution, locals_):
        locals_ = [np.asarray(a, dtype=complex) for a in locals_]
        if len(locals_) != dist.grid.size:
            raise ContractError(f"{len(locals_)} local arrays for {dist.grid.size} processors")
        shape = dist.local_shape.dims
        for r, a in enumerate(locals_):
            if a.shape != shape:
                raise ContractError(f"local array {r} has shape {a.shape}, expected {shape}")
        self.dist = dist
        self.locals = locals_

    @classmethod
    def scatter(cls, dist: Distribution, x) -> "DistributedArray":
        x = np.asarray(x, dtype=complex)
        if x.shape != dist.global_shape.dims:
            raise ContractError(f"global array shape {x.shape} != {dist.global_shape.dims}")
        return cls(dist, [x[local_slices(dist, s)].copy() for s in dist.grid.indices()])

    def gather(self) -> np.ndarray:
        y = np.empty(self.dist.global_shape.dims, dtype=complex)
        for s, a in zip(self.dist.grid.indices(), self.locals):
            y[local_slices(self.dist, s)] = a
        return y

    def local(self, s) -> np.ndarray:
        return self.locals[self.dist.grid.flat(s)]

    def __len__(self):
        return len(self.locals)


@dataclass
class CommEntry:
    """Element counts for one communication superstep."""

    step: int
    sent: list
    received: list
    self_kept: list

    @property
    def h(self) -> int:
        return int(max(max(a, b) for a, b in zip(self.sent, self.received)))

    def to_dict(self) -> dict:
        return {"step": self.step, "sent": list(self.sent), "received": list(self.received),
                "self_kept": list(self.self_kept), "h": self.h}


@dataclass
class CommReport:
    entries: list = field(default_factory=list)

    @property
    def h_total(self) -> int:
        return sum(e.h for e in self.entries)

    def to_dict(self) -> dict:
        return {"supersteps": [e.to_dict() for e in self.entries], "h_total": self.h_total}


def _dist_for(grid, local_shape) -> Distribution:
    return Distribution.cyclic(tuple(L * p for L, p in zip(local_shape, grid.dims)), grid)


def _map_workers(fn, items, workers):
    if workers is None or workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def exec_computation(step: ComputationStep, X: DistributedArray,
                     workers: int | None = None) -> DistributedArray:
    """``Y^(s) = f^(s)(X^(s))`` independently on every processor."""
    if X.dist.local_shape != step.in_shape:
        raise ContractError(f"computation step expects local shape {step.in_shape.dims}, "
                            f"array has {X.dist.local_shape.dims}")
    procs = X.dist.grid.indices()

    def work(r):
        return np.array(step.apply_local(X.locals[r], procs[r]), dtype=complex)

    out = _map_workers(work, range(len(procs)), workers)
    return DistributedArray(_dist_for(X.dist.grid, step.out_shape.dims), out)


def _puts(rule, grid, local_shape, r, s):
    L = local_shape.size
    k = np.array(np.unravel_index(np.arange(L), local_shape.dims)).T.reshape(L, grid.rank)
    svec = np.tile(np.asarray(s, dtype=np.int64), (L, 1))
    ds, dk = rule.map(svec, k)
    return rule.flatten(np.asarray(ds).reshape(L, -1), np.asarray(dk).reshape(L, -1))


def exec_communication(step: CommunicationStep, X: DistributedArray,
                       workers: int | None = None):
    """Apply the permutation; returns ``(Y, CommEntry)``.

    Every destination cell must be written exactly once, otherwise
    :class:`ScheduleError` is raised and nothing is returned.
    """
    grid, shape = X.dist.grid, X.dist.local_shape
    if step.in_shape != shape or step.grid != grid:
        raise ContractError(f"communication step on grid {step.grid.dims} with local shape "
                            f"{step.in_shape.dims} does not match array "
                            f"({grid.dims}, {shape.dims})")
    procs = grid.indices()
    P, L = grid.size, shape.size

    # each worker only builds its own put list; reads see pre-superstep state
    def work(r):
        proc, loc = _puts(step.rule, grid, shape, r, procs[r])
        return proc, loc, X.locals[r].reshape(L)

    lists = _map_workers(work, range(P), workers)
    proc = np.concatenate([p for p, _, _ in lists])
    loc = np.concatenate([q for _, q, _ in lists])
    vals = np.concatenate([v for _, _, v in lists])
    src = np.repeat(np.arange(P), L)

    if (proc < 0).any() or (loc < 0).any():
        raise ScheduleError("communication put targets a cell outside the index set")
    target = proc * L + loc
    counts = np.bincount(target, minlength=P * L)
    if (counts > 1).any():
        raise ScheduleError(f"duplicate destination: cell {int(np.argmax(counts > 1))} written "
                            f"{int(counts.max())} times")
    if (counts == 0).any():
        raise ScheduleError(f"uncovered destination: cell {int(np.argmin(counts))} never written")

    # barrier: apply in canonical (destination processor, destination index) order
    order = np.lexsort((loc, proc))
    out = np.empty(P * L, dtype=complex)
    out[target[order]] = vals[order]
    Y = DistributedArray(X.dist, [out[r * L:(r + 1) * L].reshape(shape.dims) for r in range(P)])
    return Y, _volume(src, proc, P)


def _volume(src, dst, P) -> CommEntry:
    remote = src != dst
    sent = np.bincount(src[remote], minlength=P)
    received = np.bincount(dst[remote], minlength=P)
    kept = np.bincount(src[~remote], minlength=P)
    return CommEntry(-1, [int(v) for v in sent], [int(v) for v in received], [int(v) for v in kept])


def comm_volume(step: CommunicationStep, dist: Distribution | None = None) -> CommEntry:
    """Sent / received / kept counts of a communication step, by enumeration."""
    proc, _ = step.table()
    P, L = step.grid.size, step.in_shape.size
    if dist is not None and (dist.grid != step.grid or dist.local_shape != step.in_shape):
        raise ContractError("distribution does not match the communication step")
    return _volume(np.repeat(np.arange(P), L), proc, P)


def put_records(step: CommunicationStep, X: DistributedArray) -> list:
    """The individual puts of a communication step, for inspection."""
    grid, shape = X.dist.grid, X.dist.local_shape
    records = []
    for r, s in enumerate(grid.indices()):
        proc, loc = _puts(step.rule, grid, shape, r, s)
        flat = X.locals[r].reshape(-1)
        for i in range(shape.size):
            records.append(PutRecord(tuple(s), grid.unflat(int(proc[i])),
                                     shape.unflat(int(loc[i])), complex(flat[i])))
    return records


def run(alg: LinearBspAlgorithm, X: DistributedArray, workers: int | None = None):
    """Execute every superstep in order; returns ``(output, CommReport)``."""
    if X.dist != alg.in_dist:
        raise ContractError(f"input distribution {X.dist.to_dict()} != algorithm input "
                            f"distribution {alg.in_dist.to_dict()}")
    report = CommReport()
    for i, st in enumerate(alg.steps):
        if st.kind is StepKind.COMPUTATION:
            X = exec_computation(st, X, workers)
        else:
            X, entry = exec_communication(st, X, workers)
            entry.step = i
            report.entries.append(entry)
    if X.dist.local_shape != alg.out_dist.local_shape:
        raise ContractError(f"final local shape {X.dist.local_shape.dims} != output "
                            f"distribution local shape {alg.out_dist.local_shape.dims}")
    return DistributedArray(alg.out_dist, [a.copy() for a in X.locals]), report
