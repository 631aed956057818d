import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bsp_tensor.comm import FftTranspose, TableRule
from bsp_tensor.core import Distribution
from bsp_tensor.errors import ContractError
from bsp_tensor.kernels import Dense, Dft, Duplicate, Project, Scale, HalfShift, Twiddle
from bsp_tensor.linear_bsp import (CommunicationStep, ComputationStep, LinearBspAlgorithm,
                                   apply_global, as_local_matrix, as_matrix,
                                   distribution_permutation, schedule_from_dict, schedule_to_dict,
                                   step_matrix, validate)
from bsp_tensor.oracles import dft_matrix
from bsp_tensor.transforms import make_dct2_rank1, make_fft_rank1, make_fft_rankd
from conftest import crandn


def identity(n, p=1):
    return LinearBspAlgorithm.identity(Distribution.cyclic(n, p))


def test_validate_identity():
    assert validate(identity(4, 2)) == []


def test_validate_fft_instance():
    alg = make_fft_rank1(16, 2)
    assert validate(alg) == []
    proc, loc = alg.steps[1].table()
    assert len(proc) == 16
    assert sorted((proc * 8 + loc).tolist()) == list(range(16))


def test_validate_constant_rho():
    rule = TableRule(2, 4, dest_proc=[0, 0, 0, 0, 1, 1, 1, 1], dest_local=[0] * 8)
    dist = Distribution.cyclic(8, 2)
    alg = LinearBspAlgorithm(dist, dist, [CommunicationStep(rule)])
    problems = validate(alg)
    assert any("duplicate destination" in p for p in problems)


def test_validate_shape_chain():
    dist = Distribution.cyclic(8, 2)
    alg = LinearBspAlgorithm(dist, dist, [ComputationStep([Duplicate([(2, 4)])], (4,))])
    assert any("output distribution" in p for p in validate(alg))
    alg = LinearBspAlgorithm(dist, dist, [ComputationStep((), (3,))])
    assert validate(alg)


def test_kernel_chain_checked_on_construction():
    with pytest.raises(ContractError):
        ComputationStep([Duplicate([(2, 4)]), Dft([(4, 1)])], (4,))


def test_as_matrix_identity_exact():
    M = as_matrix(identity(3))
    assert np.array_equal(M, np.eye(3))


def test_as_matrix_fft():
    assert np.allclose(as_matrix(make_fft_rank1(2, 1)), [[1, 1], [1, -1]])
    M = as_matrix(make_fft_rank1(4, 2))
    assert np.max(np.abs(M - dft_matrix(4))) <= 1e-15


def test_as_matrix_guard():
    with pytest.raises(ValueError):
        as_matrix(identity(5000))


def test_apply_global_examples():
    assert apply_global(identity(2), [5, 6]).tolist() == [5, 6]
    y = apply_global(make_fft_rank1(4, 2), [1, 2, 3, 4])
    assert np.allclose(y, [10, -2 + 2j, -2, -2 - 2j], atol=1e-14)
    y = apply_global(make_dct2_rank1(2, 1), [1, 0])
    assert np.allclose(y, [1, math.sqrt(2) / 2], atol=1e-15)


def test_apply_global_shape_error():
    with pytest.raises(ContractError):
        apply_global(make_fft_rank1(4, 2), np.zeros(5))


ALGS = [make_fft_rank1(16, 4), make_dct2_rank1(8, 2), make_fft_rankd((4, 4), (2, 1))]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, len(ALGS) - 1), st.integers(0, 2**32 - 1),
       st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_linearity(i, seed, a, b):
    alg = ALGS[i]
    r = np.random.default_rng(seed)
    shape = alg.in_dist.global_shape.dims
    x, y = crandn(r, *shape), crandn(r, *shape)
    lhs = apply_global(alg, a * x + b * y)
    rhs = a * apply_global(alg, x) + b * apply_global(alg, y)
    scale = max(np.abs(rhs).max(), np.abs(lhs).max(), 1e-300)
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * scale + 1e-300


def test_local_matrix_is_conjugated_global_matrix():
    alg = make_fft_rank1(16, 2)
    P = np.eye(16)[distribution_permutation(alg.in_dist)]  # local-view <- global
    assert np.allclose(as_local_matrix(alg), P @ as_matrix(alg) @ P.T, atol=1e-12)


def test_step_matrix_comm_is_permutation():
    M = step_matrix(CommunicationStep(FftTranspose(16, 2)), (2,))
    assert np.array_equal(M.sum(axis=0), np.ones(16)) and np.array_equal(M.sum(axis=1), np.ones(16))


def test_schedule_roundtrip(rng):
    alg = make_dct2_rank1(8, 2)
    d = json.loads(json.dumps(schedule_to_dict(alg)))
    back = schedule_from_dict(d)
    assert back.signature == alg.signature
    x = rng.standard_normal(8)
    assert np.array_equal(apply_global(back, x), apply_global(alg, x))


def test_dense_kernel_roundtrip(rng):
    m = crandn(rng, 3, 3)
    dist = Distribution.cyclic(3, 1)
    alg = LinearBspAlgorithm(dist, dist, [ComputationStep([Dense(m, (3,))], (3,))])
    back = schedule_from_dict(json.loads(json.dumps(schedule_to_dict(alg))))
    assert np.array_equal(as_matrix(back), as_matrix(alg))
    assert np.allclose(as_matrix(alg), m)


def test_kernels_are_linear_maps(rng):
    # each primitive kernel family commutes with linear combinations
    kernels = [Dft([(4, 2)]), Duplicate([(2, 3)]), Project([(2, 5)]),
               Scale([Twiddle(8, 4)]), Scale([HalfShift(8, 2)]), Dense(crandn(rng, 2, 3), (3,), (2,))]
    for k in kernels:
        x, y = crandn(rng, *k.in_shape), crandn(rng, *k.in_shape)
        a, b = 0.3 - 2j, 1.7 + 0.2j
        assert np.allclose(k.apply(a * x + b * y, (1,)), a * k.apply(x, (1,)) + b * k.apply(y, (1,)))
