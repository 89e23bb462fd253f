"""Hypergraph view of a sparse tensor and the analytic per-mode counts.

Vertices are the index values of every mode, hyperedges are nonzeros. All
counts are in elements; converting to bytes is the simulator's job.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor_io import SparseTensorCOO


@dataclass(frozen=True)
class Hypergraph:
    vertex_counts: tuple[int, ...]
    num_hyperedges: int
    tensor: SparseTensorCOO

    @property
    def num_vertices(self) -> int:
        return sum(self.vertex_counts)


@dataclass(frozen=True, eq=False)
class ModeOrdering:
    """Entry permutation grouping nonzeros by their output-mode coordinate."""

    mode: int
    permutation: np.ndarray

    def is_valid_for(self, tensor: SparseTensorCOO) -> bool:
        perm = np.asarray(self.permutation)
        if perm.shape != (tensor.nnz,):
            return False
        if tensor.nnz and not np.array_equal(np.sort(perm), np.arange(tensor.nnz)):
            return False
        out = tensor.coords[perm, self.mode]
        return bool(np.all(out[1:] >= out[:-1]))

    def to_text(self) -> str:
        return "".join(f"{int(i)}\n" for i in self.permutation)

    @classmethod
    def from_text(cls, mode: int, text: str) -> "ModeOrdering":
        return cls(mode, np.array([int(t) for t in text.split()], dtype=np.int64))


def build_hypergraph(tensor: SparseTensorCOO) -> Hypergraph:
    return Hypergraph(tuple(tensor.dims), tensor.nnz, tensor)


def sort_for_mode(tensor: SparseTensorCOO, mode: int) -> ModeOrdering:
    if not 0 <= mode < tensor.num_modes:
        raise ValueError(f"mode {mode} out of range for {tensor.num_modes}-mode tensor")
    perm = np.argsort(tensor.coords[:, mode], kind="stable")
    return ModeOrdering(mode, perm.astype(np.int64))


def compute_count(num_modes: int, nnz: int, rank: int) -> int:
    """Element-wise operations per mode: N-1 multiplies plus one add, per nonzero per rank."""
    return int(num_modes) * int(nnz) * int(rank)


def traffic_count(num_modes: int, nnz: int, rank: int, out_rows: int) -> int:
    """External-memory elements per mode with no on-chip reuse.

    One load per nonzero, one factor row of ``rank`` elements per nonzero per
    input mode, and one store of every output row.
    """
    if num_modes < 2:
        raise ValueError("need at least 2 modes")
    if min(nnz, rank, out_rows) < 0:
        raise ValueError("counts must be non-negative")
    return int(nnz) + (int(num_modes) - 1) * int(nnz) * int(rank) + int(out_rows) * int(rank)
