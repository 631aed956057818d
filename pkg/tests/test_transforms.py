import math

import numpy as np
import pytest

from bsp_tensor.errors import DivisibilityError
from bsp_tensor.linear_bsp import StepKind, apply_global, step_matrix, validate
from bsp_tensor.oracles import dct2_oracle, dct2_rankd_oracle, dft_oracle, dft_rankd_oracle
from bsp_tensor.transforms import (admissible_grids, dct_comm_maps, make_dct2_rank1,
                                   make_dct2_rankd, make_fft_rank1, make_fft_rankd,
                                   make_fft_rankd_reference)
from conftest import crandn

C, M = StepKind.COMPUTATION, StepKind.COMMUNICATION
SQ = math.sqrt(2) / 2


def relerr(y, ref):
    return np.max(np.abs(y - ref)) / np.max(np.abs(ref))


def test_fft_rank1_examples(rng):
    assert np.allclose(apply_global(make_fft_rank1(1, 1), [3 - 1j]), [3 - 1j])
    assert np.allclose(apply_global(make_fft_rank1(4, 2), [1, 2, 3, 4]), [10, -2 + 2j, -2, -2 - 2j])
    x = crandn(rng, 16)
    assert relerr(apply_global(make_fft_rank1(16, 2), x), dft_oracle(x)) <= 1e-9


def test_fft_structure():
    alg = make_fft_rank1(16, 4)
    assert alg.signature == (C, M, C)
    assert validate(alg) == []


@pytest.mark.parametrize("n,p", [(6, 2), (8, 4), (12, 3)])
def test_fft_divisibility(n, p):
    with pytest.raises(DivisibilityError, match="p² \\| n"):
        make_fft_rank1(n, p)


def test_fft_reference_examples(rng):
    imp = np.zeros((2, 2))
    imp[0, 0] = 1
    ref = make_fft_rankd_reference((2, 2), (1, 1))
    assert np.allclose(apply_global(ref, imp), np.ones((2, 2)))
    assert np.allclose(apply_global(ref, [[1, 2], [3, 4]]), [[10, -2], [-4, 0]])
    X = crandn(rng, 4, 4)
    alg = make_fft_rankd_reference((4, 4), (2, 2))
    assert relerr(apply_global(alg, X), dft_rankd_oracle(X)) <= 1e-9
    with pytest.raises(DivisibilityError):
        make_fft_rankd_reference((4, 6), (2, 2))


@pytest.mark.parametrize("shape,grid", [((4, 4), (2, 2)), ((16, 4), (4, 2)), ((4, 4, 4), (2, 1, 2))])
def test_schedule_equivalence(shape, grid):
    a, b = make_fft_rankd(shape, grid), make_fft_rankd_reference(shape, grid)
    assert a.signature == b.signature
    for sa, sb in zip(a.steps, b.steps):
        if sa.kind is M:
            for ta, tb in zip(sa.table(), sb.table()):
                assert np.array_equal(ta, tb)
        else:
            assert np.max(np.abs(step_matrix(sa, a.grid) - step_matrix(sb, b.grid))) <= 1e-12


def test_dct_rank1_examples(rng):
    assert np.allclose(apply_global(make_dct2_rank1(2, 1), [1, 0]), [1, SQ], atol=1e-15)
    assert np.allclose(apply_global(make_dct2_rank1(2, 1), [1, 1]), [2, 0], atol=1e-15)
    x = rng.standard_normal(8)
    y = apply_global(make_dct2_rank1(8, 2), x)
    assert relerr(y, dct2_oracle(x)) <= 1e-9
    assert np.max(np.abs(y.imag)) <= 1e-9


def test_dct_hand_derivation():
    # w = [1, 0, 0, 1], z = DFT_4(w) = [2, 1+i, 0, 1-i], y_1 = (1/2) e^{-i pi/4} (1+i)
    z = dft_oracle([1, 0, 0, 1])
    assert np.allclose(z, [2, 1 + 1j, 0, 1 - 1j])
    assert np.isclose(0.5 * np.exp(-1j * np.pi / 4) * z[1], SQ)


def test_dct_structure():
    assert make_dct2_rank1(8, 2).signature == (C, M, C, M, C, C)
    assert validate(make_dct2_rank1(8, 4)) == []


@pytest.mark.parametrize("n,p", [(3, 3), (5, 2), (4, 4)])
def test_dct_divisibility(n, p):
    with pytest.raises(DivisibilityError, match="p² \\| 2n"):
        make_dct2_rank1(n, p)


def test_dct_comm_maps():
    psi, rho = dct_comm_maps(4, 2)
    for s in range(2):
        assert (psi(s, 0), rho(s, 0)) == (s, 0)
    assert (psi(0, 3), rho(0, 3)) == (1, 2)
    cells = {(psi(s, k), rho(s, k)) for s in range(2) for k in range(4)}
    assert len(cells) == 8 and cells == {(s, k) for s in range(2) for k in range(4)}


def test_dct_comm_maps_match_rule():
    alg = make_dct2_rank1(8, 2)
    psi, rho = dct_comm_maps(8, 2)
    rule = alg.steps[1].rule
    for s in range(2):
        for k in range(8):
            assert rule.dest((s,), (k,)) == ((psi(s, k),), (rho(s, k),))


def test_dct_rankd_examples(rng):
    imp = np.zeros((2, 2))
    imp[0, 0] = 1
    alg = make_dct2_rankd((2, 2), (1, 1))
    assert np.allclose(apply_global(alg, imp), [[1, SQ], [SQ, 0.5]], atol=1e-15)
    assert np.allclose(apply_global(alg, np.ones((2, 2))), [[4, 0], [0, 0]], atol=1e-14)
    X = rng.standard_normal((4, 4))
    y = apply_global(make_dct2_rankd((4, 4), (2, 2)), X)
    assert relerr(y, dct2_rankd_oracle(X)) <= 1e-9


def test_dct_extraction_scale_rank2():
    alg = make_dct2_rankd((4, 2), (2, 1))
    last = alg.steps[-1]
    # 2^-d times the product of half-step phases at global indices
    vals = last.kernels[-1].table((1, 0))
    k0, k1 = np.indices((2, 2))
    expected = 0.25 * np.exp(-1j * np.pi * (1 + 2 * k0) / 8) * np.exp(-1j * np.pi * k1 / 4)
    assert np.allclose(vals, expected, atol=1e-15)


def test_p_independence(rng):
    x = crandn(rng, 64)
    outs = [apply_global(make_fft_rank1(64, p), x) for p in (1, 2, 4, 8)]
    for y in outs[1:]:
        assert relerr(y, outs[0]) <= 1e-9


@pytest.mark.parametrize("n,p", [(16, 2), (64, 4), (256, 8)])
def test_parseval(rng, n, p):
    x = crandn(rng, n)
    y = apply_global(make_fft_rank1(n, p), x)
    assert abs(np.sum(np.abs(y) ** 2) - n * np.sum(np.abs(x) ** 2)) <= 1e-9 * n * np.sum(np.abs(x) ** 2)


def test_admissible_grids():
    assert admissible_grids((16,)) == [(1,), (2,), (4,)]
    assert admissible_grids((8,), "dct") == [(1,), (2,), (4,)]
    assert (2, 1) in admissible_grids((4, 2))
