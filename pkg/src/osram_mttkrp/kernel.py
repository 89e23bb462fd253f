"""Functional sparse MTTKRP for any output mode, plus a dense reference.

``mttkrp_mode`` follows the output-major loop structure of the accelerator:
nonzeros are grouped by output row, each nonzero multiplies its value into
the input factor rows it touches, and the product is accumulated into the
output row. ``mttkrp_dense_oracle`` knows nothing about that structure; it
densifies the tensor and multiplies its unfolding by an explicit
Khatri-Rao product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tensor_io import FactorMatrix, SparseTensorCOO

DENSE_ORACLE_LIMIT = 10**6


class CapacityGuardError(ValueError):
    pass


@dataclass
class OpCounter:
    """Element-wise multiplies and adds performed by an instrumented run."""

    multiplies: int = 0
    adds: int = 0

    @property
    def total(self) -> int:
        return self.multiplies + self.adds


def _check_factors(tensor: SparseTensorCOO, factors: Sequence[FactorMatrix], mode: int) -> int:
    n = tensor.num_modes
    if not 0 <= mode < n:
        raise ValueError(f"mode {mode} out of range for {n}-mode tensor")
    if len(factors) != n:
        raise ValueError(f"expected {n} factor matrices, got {len(factors)}")
    ranks = {f.rank for f in factors}
    if len(ranks) != 1:
        raise ValueError(f"factor matrices disagree on rank: {sorted(ranks)}")
    for k, (f, d) in enumerate(zip(factors, tensor.dims)):
        if f.rows != d:
            raise ValueError(f"factor {k} has {f.rows} rows, tensor mode {k} has {d}")
    return ranks.pop()


def mttkrp_mode(
    tensor: SparseTensorCOO,
    factors: Sequence[FactorMatrix],
    mode: int,
    counter: OpCounter | None = None,
) -> FactorMatrix:
    rank = _check_factors(tensor, factors, mode)
    out = np.zeros((tensor.dims[mode], rank))
    if tensor.nnz == 0:
        return FactorMatrix(mode, out)

    order = np.argsort(tensor.coords[:, mode], kind="stable")
    coords = tensor.coords[order]
    vals = tensor.values[order]

    # value times each input factor row: N-1 multiplies per (nonzero, rank)
    prod = np.repeat(vals[:, None], rank, axis=1)
    for k in range(tensor.num_modes):
        if k == mode:
            continue
        prod *= factors[k].values[coords[:, k]]
        if counter is not None:
            counter.multiplies += prod.size

    # accumulate each run of equal output rows (one add per (nonzero, rank))
    rows = coords[:, mode]
    starts = np.flatnonzero(np.r_[True, rows[1:] != rows[:-1]])
    out[rows[starts]] = np.add.reduceat(prod, starts, axis=0)
    if counter is not None:
        counter.adds += prod.size
    return FactorMatrix(mode, out)


def khatri_rao(mats: Sequence[np.ndarray]) -> np.ndarray:
    """Column-wise Kronecker product; the first matrix's row index varies slowest."""
    out = mats[0]
    for m in mats[1:]:
        out = (out[:, None, :] * m[None, :, :]).reshape(-1, out.shape[1])
    return out


def densify(tensor: SparseTensorCOO) -> np.ndarray:
    dense = np.zeros(tensor.dims)
    np.add.at(dense, tuple(tensor.coords.T), tensor.values)
    return dense


def mttkrp_dense_oracle(
    tensor: SparseTensorCOO,
    factors: Sequence[FactorMatrix],
    mode: int,
    limit: int = DENSE_ORACLE_LIMIT,
) -> FactorMatrix:
    rank = _check_factors(tensor, factors, mode)
    if math.prod(tensor.dims) > limit:
        raise CapacityGuardError(f"dense size {math.prod(tensor.dims)} exceeds guard {limit}")
    dense = densify(tensor)
    others = [k for k in range(tensor.num_modes) if k != mode]
    unfolded = np.moveaxis(dense, mode, 0).reshape(tensor.dims[mode], -1)
    kr = khatri_rao([factors[k].values for k in others])
    assert kr.shape == (unfolded.shape[1], rank)
    return FactorMatrix(mode, unfolded @ kr)
