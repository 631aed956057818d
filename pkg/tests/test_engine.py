import numpy as np
import pytest

from bsp_tensor.comm import DctReverse, FftTranspose, IdentityRule, TableRule
from bsp_tensor.core import Distribution
from bsp_tensor.engine import (DistributedArray, comm_volume, exec_communication, exec_computation,
                               put_records, run)
from bsp_tensor.errors import ContractError, ScheduleError
from bsp_tensor.kernels import Dft, Kernel, Scale, Twiddle
from bsp_tensor.linear_bsp import CommunicationStep, ComputationStep, LinearBspAlgorithm
from bsp_tensor.transforms import make_dct2_rank1, make_fft_rank1, make_fft_rankd
from conftest import crandn


def scatter(n, p, x):
    return DistributedArray.scatter(Distribution.cyclic(n, p), x)


def test_scatter_gather_roundtrip(rng):
    x = crandn(rng, 8, 6)
    X = DistributedArray.scatter(Distribution.cyclic((8, 6), (2, 3)), x)
    assert X.local((1, 2)).tolist() == x[1::2, 2::3].tolist()
    assert np.array_equal(X.gather(), x)


def test_distributed_array_contract():
    with pytest.raises(ContractError):
        DistributedArray(Distribution.cyclic(4, 2), [np.zeros(2)])
    with pytest.raises(ContractError):
        DistributedArray(Distribution.cyclic(4, 2), [np.zeros(2), np.zeros(3)])


def test_run_empty_algorithm(rng):
    dist = Distribution.cyclic(6, 3)
    x = crandn(rng, 6)
    Y, report = run(LinearBspAlgorithm.identity(dist), DistributedArray.scatter(dist, x))
    assert np.array_equal(Y.gather(), x)
    assert report.entries == []


def test_run_fft_examples():
    alg = make_fft_rank1(4, 2)
    Y, report = run(alg, scatter(4, 2, [1, 2, 3, 4]))
    assert np.allclose(Y.gather(), [10, -2 + 2j, -2, -2 - 2j], atol=1e-14)
    Y, _ = run(alg, scatter(4, 2, [1, 0, 0, 0]))
    assert np.allclose(Y.gather(), [1, 1, 1, 1])
    assert len(report.entries) == 1 and report.entries[0].step == 1


def test_run_distribution_mismatch():
    with pytest.raises(ContractError):
        run(make_fft_rank1(4, 2), scatter(4, 1, np.zeros(4)))


def test_exec_computation_identity(rng):
    X = scatter(6, 3, crandn(rng, 6))
    Y = exec_computation(ComputationStep((), (2,)), X)
    assert all(np.array_equal(a, b) for a, b in zip(X.locals, Y.locals))


def test_twiddle_on_processor_one():
    # x_k <- w_4^{k s} x_k with s = 1: [a, b] -> [a, -i b]
    step = ComputationStep([Scale([Twiddle(4, 2)])], (2,))
    X = DistributedArray(Distribution.cyclic(4, 2), [np.array([5, 6]), np.array([2 + 1j, 3])])
    Y = exec_computation(step, X)
    assert Y.locals[1].tolist() == [2 + 1j, -3j]
    assert Y.locals[0].tolist() == [5, 6]


def test_local_dft_step():
    step = ComputationStep([Dft([(2, 1)])], (2,))
    X = DistributedArray(Distribution.cyclic(4, 2), [np.array([1, 3]), np.array([2, 4])])
    Y = exec_computation(step, X)
    assert Y.locals[0].tolist() == [4, -2]


def test_computation_shape_mismatch():
    with pytest.raises(ContractError):
        exec_computation(ComputationStep((), (3,)), scatter(4, 2, np.zeros(4)))


class RecordingKernel(Kernel):
    kind = "recording"

    def __init__(self, shape, log):
        self.in_shape = self.out_shape = tuple(shape)
        self.log = log

    def apply(self, x, s):
        self.log.append((tuple(s), x.copy()))
        return x


@pytest.mark.parametrize("workers", [None, 4])
def test_superstep_isolation(rng, workers):
    # each f^(s) sees exactly its own local array and nothing else
    log = []
    X = DistributedArray.scatter(Distribution.cyclic((4, 6), (2, 3)), crandn(rng, 4, 6))
    exec_computation(ComputationStep([RecordingKernel((2, 2), log)], (2, 2)), X, workers=workers)
    assert sorted(s for s, _ in log) == X.dist.grid.indices()
    for s, seen in log:
        assert np.array_equal(seen, X.local(s))


def test_fft_transpose_destination():
    step = CommunicationStep(FftTranspose(16, 2))
    assert step.rule.dest((1,), (3,)) == ((1,), (5,))
    X = DistributedArray(Distribution.cyclic(16, 2), [np.arange(8), 100 + np.arange(8)])
    Y, _ = exec_communication(step, X)
    assert Y.locals[1][5] == X.locals[1][3]


def test_dct_reverse_destination():
    step = CommunicationStep(DctReverse(4, 2))
    assert step.rule.dest((0,), (3,)) == ((1,), (2,))
    X = DistributedArray(Distribution.cyclic(8, 2), [np.arange(4), 10 + np.arange(4)])
    Y, _ = exec_communication(step, X)
    assert Y.locals[1][2] == 3


def _two_phase(step, X):
    # reference: snapshot everything, then write
    grid, shape = X.dist.grid, X.dist.local_shape
    snap = [a.copy() for a in X.locals]
    out = [np.full(shape.dims, np.nan, dtype=complex) for _ in snap]
    for s in grid.indices():
        for k in shape.indices():
            ds, dk = step.rule.dest(s, k)
            out[grid.flat(ds)][dk] = snap[grid.flat(s)][k]
    return out


@pytest.mark.parametrize("rule,n,p", [(FftTranspose(16, 2), 16, 2), (FftTranspose(64, 4), 64, 4),
                                      (DctReverse(8, 2), 16, 2), (IdentityRule(3, 2), 6, 3)])
def test_barrier_semantics(rng, rule, n, p):
    step = CommunicationStep(rule)
    X = scatter(n, p, crandn(rng, n))
    Y, _ = exec_communication(step, X)
    for a, b in zip(Y.locals, _two_phase(step, X)):
        assert np.array_equal(a, b)


def test_identity_permutation(rng):
    X = scatter(6, 3, crandn(rng, 6))
    Y, entry = exec_communication(CommunicationStep(IdentityRule(3, 2)), X)
    assert np.array_equal(Y.gather(), X.gather())
    assert entry.sent == [0, 0, 0] and entry.self_kept == [2, 2, 2]


def test_duplicate_destination_raises():
    rule = TableRule(2, 2, dest_proc=[0, 0, 1, 1], dest_local=[0, 0, 0, 1])
    with pytest.raises(ScheduleError, match="duplicate"):
        exec_communication(CommunicationStep(rule), scatter(4, 2, np.arange(4)))


def test_out_of_range_destination_raises():
    rule = TableRule(2, 2, dest_proc=[0, 0, 1, 2], dest_local=[0, 1, 0, 1])
    with pytest.raises(ScheduleError):
        exec_communication(CommunicationStep(rule), scatter(4, 2, np.arange(4)))


def test_comm_volume_examples():
    e = comm_volume(CommunicationStep(IdentityRule(4, 3)))
    assert e.sent == [0] * 4 and e.h == 0
    e = comm_volume(CommunicationStep(FftTranspose(16, 2)))
    assert e.sent == [4, 4] and e.received == [4, 4] and e.self_kept == [4, 4] and e.h == 4
    e = comm_volume(CommunicationStep(DctReverse(4, 2)))
    assert e.sent == [2, 2] and e.self_kept == [2, 2]


def test_volume_accounting_invariant():
    for rule in (FftTranspose(64, 4), DctReverse(16, 4)):
        e = comm_volume(CommunicationStep(rule))
        total = rule.grid.size * rule.local_shape.size
        assert sum(e.sent) + sum(e.self_kept) == total
        assert sum(e.sent) == sum(e.received)


def test_put_records():
    step = CommunicationStep(FftTranspose(4, 2))
    X = scatter(4, 2, [1, 2, 3, 4])
    recs = put_records(step, X)
    assert len(recs) == 4
    # P(1) local 0 holds x_1 and is sent to P(0) at index 1
    r = [r for r in recs if r.src_proc == (1,) and r.value == 2][0]
    assert r.dst_proc == (0,) and r.dst_index == (1,)


@pytest.mark.parametrize("alg", [make_fft_rank1(64, 4), make_dct2_rank1(16, 4),
                                 make_fft_rankd((8, 4), (2, 2))])
def test_run_deterministic_across_workers(rng, alg):
    x = crandn(rng, *alg.in_dist.global_shape.dims)
    X = DistributedArray.scatter(alg.in_dist, x)
    Y1, r1 = run(alg, X)
    Y2, r2 = run(alg, X, workers=4)
    Y3, _ = run(alg, X, workers=3)
    assert Y1.gather().tobytes() == Y2.gather().tobytes() == Y3.gather().tobytes()
    assert r1.to_dict() == r2.to_dict()
