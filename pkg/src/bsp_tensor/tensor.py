"""Tensor product of linear BSP algorithms.

Given algorithms ``A_1, ..., A_d`` for ``f_1, ..., f_d`` with the same
sequence of superstep kinds, build one algorithm for ``f_1 ⊗ ... ⊗ f_d`` on
the product processor grid: distributions and communication maps combine
componentwise, computation supersteps combine as local tensor products.
Axis ``l`` of the result belongs to ``A_{l+1}`` (first factor slowest).
"""
from __future__ import annotations

import numpy as np

from .comm import ProductRule
from .core import Distribution, ProcessorGrid, Shape
from .errors import StructureError
from .linear_bsp import (CommunicationStep, ComputationStep, LinearBspAlgorithm, StepKind,
                         identity_communication)


def _cat(shapes) -> tuple:
    return tuple(d for s in shapes for d in s)


def product_distribution(dists) -> Distribution:
    return Distribution(ProcessorGrid(_cat(d.grid.dims for d in dists)),
                        Shape(_cat(d.global_shape.dims for d in dists)))


def tensor_communication(steps) -> CommunicationStep:
    """``psi(s, k)_l = psi_l(s_l, k_l)`` and ``rho(s, k)_l = rho_l(s_l, k_l)``."""
    return CommunicationStep(ProductRule([st.rule for st in steps]))


def tensor_computation(steps) -> ComputationStep:
    """Local tensor product ``g_1 ⊗ ... ⊗ g_d`` of computation supersteps.

    Kernel lists are aligned position by position. Where every factor uses the
    same kernel family (missing entries count as that family's identity) the
    per-axis descriptors are concatenated into one kernel. Mixed families are
    split into one kernel per factor, acting on its own axes with identities
    elsewhere, using ``g ⊗ h = (g ⊗ id) ∘ (id ⊗ h)``.
    """
    steps = list(steps)
    shapes = [list(st.in_shape.dims) for st in steps]

    in_shape = _cat(shapes)
    depth = max((len(st.kernels) for st in steps), default=0)
    out = []

    for i in range(depth):
        row = [st.kernels[i] if i < len(st.kernels) else None for st in steps]
        families = {type(k) for k in row if k is not None}
        if len(families) == 1:
            fam = families.pop()
            parts = [k if k is not None else fam.identity(tuple(shapes[l]))
                     for l, k in enumerate(row)]
            out.append(fam.tensor(parts))
            for l, k in enumerate(row):
                if k is not None:
                    shapes[l] = list(k.out_shape)
            continue
        for l, k in enumerate(row):
            if k is None:
                continue
            fam = type(k)
            parts = [k if m == l else fam.identity(tuple(shapes[m])) for m in range(len(steps))]
            out.append(fam.tensor(parts))
            shapes[l] = list(k.out_shape)

    return ComputationStep(out, in_shape)


def tensor(algs, pad: bool = False) -> LinearBspAlgorithm:
    """Combine algorithms with equal superstep structure into their tensor product.

    With ``pad=True`` shorter structures are first padded with identity
    supersteps to the longest one (see :func:`pad_identity`).
    """
    algs = list(algs)
    if not algs:
        raise ValueError("tensor needs at least one algorithm")
    if pad:
        target = max((a.signature for a in algs), key=len)
        algs = [pad_identity(a, target) for a in algs]
    sigs = {a.signature for a in algs}
    if len(sigs) != 1:
        raise StructureError("algorithms have different superstep structure: "
                             + "; ".join(_sig_str(a.signature) for a in algs))
    steps = []
    for i, kind in enumerate(algs[0].signature):
        column = [a.steps[i] for a in algs]
        if kind is StepKind.COMPUTATION:
            steps.append(tensor_computation(column))
        else:
            steps.append(tensor_communication(column))
    name = " ⊗ ".join(a.name or "?" for a in algs)
    return LinearBspAlgorithm(product_distribution([a.in_dist for a in algs]),
                              product_distribution([a.out_dist for a in algs]), steps, name=name)


def _sig_str(sig) -> str:
    return "[" + ", ".join("Comp" if k is StepKind.COMPUTATION else "Comm" for k in sig) + "]"


def pad_identity(alg: LinearBspAlgorithm, target) -> LinearBspAlgorithm:
    """Insert identity supersteps so that ``alg.signature`` becomes ``target``.

    The existing steps are matched to the earliest compatible positions of
    ``target``; every unmatched position gets an identity step of that kind.
    """
    target = tuple(StepKind(k) for k in target)
    own = alg.signature
    positions, j = [], 0
    for i, kind in enumerate(target):
        if j < len(own) and own[j] is kind:
            positions.append(i)
            j += 1
    if j != len(own):
        raise StructureError(f"structure {_sig_str(own)} does not embed in {_sig_str(target)}")
    steps, shape, src = [], alg.in_dist.local_shape, iter(alg.steps)
    matched = set(positions)
    for i, kind in enumerate(target):
        if i in matched:
            st = next(src)
        elif kind is StepKind.COMPUTATION:
            st = ComputationStep((), shape)
        else:
            st = identity_communication(alg.grid, shape)
        steps.append(st)
        shape = st.out_shape
    return LinearBspAlgorithm(alg.in_dist, alg.out_dist, steps, name=alg.name)


def distribute_permutation(dists) -> np.ndarray:
    """Index map of the isomorphism pulling direct sums out of tensor products.

    Position ``a`` in the Kronecker ordering of the factors' local views
    (each factor ordered ``(s_l, k_l)``) corresponds to position ``perm[a]``
    in the local view of the product distribution (``s`` row-major, then
    ``k`` row-major).
    """
    dims = []
    for d in dists:
        dims.append((d.grid.size, d.local_shape))
    P = [p for p, _ in dims]
    Ls = [L.size for _, L in dims]
    counts = [p * L for p, L in zip(P, Ls)]
    a = np.arange(int(np.prod(counts)))
    per = np.unravel_index(a, counts)
    s_lin = [idx // L for idx, L in zip(per, Ls)]
    k_lin = [idx % L for idx, L in zip(per, Ls)]
    s_multi = [np.unravel_index(sl, d.grid.dims) for sl, d in zip(s_lin, dists)]
    k_multi = [np.unravel_index(kl, d.local_shape.dims) for kl, d in zip(k_lin, dists)]
    grid = _cat(d.grid.dims for d in dists)
    local = _cat(d.local_shape.dims for d in dists)
    s_flat = np.ravel_multi_index(tuple(c for m in s_multi for c in m), grid)
    k_flat = np.ravel_multi_index(tuple(c for m in k_multi for c in m), local)
    return s_flat * int(np.prod(local)) + k_flat
