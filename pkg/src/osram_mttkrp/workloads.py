"""Bundled desk-scale synthetic workloads shaped after the FROSTT tensors.

Each stand-in keeps the source tensor's mode count, aspect ratio and density:
every dim is shrunk by the same factor so that the scaled tensor holds the
requested number of nonzeros. Skew sets the locality class.
"""

from __future__ import annotations

import math

from .tensor_io import SyntheticSpec

# name: (dims, nonzeros) as published for the full tensors
FROSTT_SHAPES: dict[str, tuple[tuple[float, ...], float]] = {
    "nell-1": ((2.9e6, 2.1e6, 25.5e6), 143.6e6),
    "nell-2": ((12.1e3, 9.2e3, 28.8e3), 76.9e6),
    "patents": ((46, 239.2e3, 239.2e3), 3.6e9),
    "lbnl": ((1.6e3, 4.2e3, 1.6e3, 4.2e3, 868.1e3), 1.7e6),
    "delicious": ((532.9e3, 17.3e6, 2.5e6, 1.4e3), 140.1e6),
}


def density_scaled_dims(dims: tuple[float, ...], nnz_full: float, nnz: int, min_dim: int = 2) -> tuple[int, ...]:
    """Shrink every mode by ``(nnz / nnz_full) ** (1 / N)``, preserving density."""
    factor = (nnz / nnz_full) ** (1.0 / len(dims))
    return tuple(max(min_dim, round(d * factor)) for d in dims)


def frostt_like(shape: str, nnz: int, skew: float, seed: int = 1, name: str | None = None) -> SyntheticSpec:
    dims, full = FROSTT_SHAPES[shape]
    return SyntheticSpec(density_scaled_dims(dims, full, nnz), nnz, skew, seed, name or f"{shape}-like")


BUNDLED: dict[str, SyntheticSpec] = {
    "tiny": SyntheticSpec((4, 4, 4), 64, 0.0, 7, "tiny"),
    "nell2-like": frostt_like("nell-2", 100_000, 1.5, name="nell2-like"),
    # the 46-row mode collapses to 2 rows when scaled, so this stand-in
    # does not keep the source tensor's reuse
    "patents-like": frostt_like("patents", 20_000, 1.0, name="patents-like"),
    "nell1-like": frostt_like("nell-1", 100_000, 0.0, name="nell1-like"),
    "delicious-like": frostt_like("delicious", 20_000, 0.0, name="delicious-like"),
    "lbnl-like": frostt_like("lbnl", 20_000, 0.5, name="lbnl-like"),
}

HIGH_LOCALITY = ("nell2-like",)
LOW_LOCALITY = ("nell1-like", "delicious-like")


def density(spec: SyntheticSpec) -> float:
    return spec.nnz / math.prod(spec.dims)
