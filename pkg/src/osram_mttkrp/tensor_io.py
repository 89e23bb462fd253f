"""Sparse tensor containers, FROSTT ``.tns`` I/O and synthetic workloads."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np


class TensorParseError(ValueError):
    """Malformed ``.tns`` input. ``lineno`` is 1-based."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class CapacityError(ValueError):
    pass


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SparseTensorCOO:
    """N-mode coordinate-list tensor with 0-based coordinates.

    ``coords`` has shape ``(nnz, N)`` and ``values`` shape ``(nnz,)``. Both
    arrays are read-only after construction.
    """

    dims: tuple[int, ...]
    coords: np.ndarray
    values: np.ndarray
    name: str = "tensor"

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if len(dims) < 2:
            raise ValueError(f"need at least 2 modes, got {len(dims)}")
        if any(d < 1 for d in dims):
            raise ValueError(f"dims must be positive, got {dims}")
        coords = np.asarray(self.coords, dtype=np.int64).reshape(-1, len(dims))
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if coords.shape[0] != values.shape[0]:
            raise ValueError("coords and values disagree on nonzero count")
        if coords.size:
            if coords.min() < 0 or np.any(coords.max(axis=0) >= np.asarray(dims)):
                raise ValueError("coordinate out of range for dims")
        object.__setattr__(self, "coords", _frozen(coords))
        object.__setattr__(self, "values", _frozen(values))

    @property
    def num_modes(self) -> int:
        return len(self.dims)

    @property
    def nnz(self) -> int:
        return int(self.values.shape[0])

    def entries(self) -> list[tuple[tuple[int, ...], float]]:
        return [(tuple(int(c) for c in row), float(v)) for row, v in zip(self.coords, self.values)]

    def has_unique_coords(self) -> bool:
        if self.nnz < 2:
            return True
        return np.unique(self.coords, axis=0).shape[0] == self.nnz

    def scaled(self, alpha: float) -> "SparseTensorCOO":
        return SparseTensorCOO(self.dims, self.coords, self.values * alpha, self.name)

    def permuted(self, perm: Sequence[int]) -> "SparseTensorCOO":
        """Same tensor with its entry list reordered by ``perm``."""
        perm = np.asarray(perm, dtype=np.int64)
        return SparseTensorCOO(self.dims, self.coords[perm], self.values[perm], self.name)

    @classmethod
    def from_entries(
        cls,
        entries: Iterable[tuple[Sequence[int], float]],
        dims: Sequence[int] | None = None,
        name: str = "tensor",
    ) -> "SparseTensorCOO":
        """Build from ``(coords, value)`` pairs, merging duplicates by summation."""
        merged: dict[tuple[int, ...], float] = {}
        for coords, value in entries:
            key = tuple(int(c) for c in coords)
            merged[key] = merged.get(key, 0.0) + float(value)
        if dims is None:
            if not merged:
                raise ValueError("dims are required for an empty tensor")
            n = len(next(iter(merged)))
            dims = [max(k[m] for k in merged) + 1 for m in range(n)]
        n = len(dims)
        coords = np.array(list(merged.keys()), dtype=np.int64).reshape(-1, n)
        values = np.array(list(merged.values()), dtype=np.float64)
        return cls(tuple(dims), coords, values, name)


@dataclass(frozen=True, eq=False)
class FactorMatrix:
    mode: int
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] < 1:
            raise ValueError(f"factor matrix must be rows x R with R >= 1, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("factor matrix has non-finite values")
        object.__setattr__(self, "values", _frozen(values))

    @property
    def rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def rank(self) -> int:
        return int(self.values.shape[1])


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a deterministic synthetic tensor.

    ``skew`` is a Zipf exponent per mode (a scalar applies to every mode);
    0 gives uniform indices, larger values concentrate nonzeros on a few
    rows and therefore raise factor-row reuse.
    """

    dims: tuple[int, ...]
    nnz: int
    skew: tuple[float, ...] | float = 0.0
    seed: int = 0
    name: str = "synthetic"

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        skew = self.skew
        if isinstance(skew, (int, float)):
            skew = (float(skew),) * len(dims)
        skew = tuple(float(s) for s in skew)
        object.__setattr__(self, "skew", skew)
        if len(dims) < 2 or any(d < 1 for d in dims):
            raise ValueError(f"invalid dims {dims}")
        if len(skew) != len(dims):
            raise ValueError("skew needs one exponent per mode")
        if any(s < 0 or not math.isfinite(s) for s in skew):
            raise ValueError(f"skew must be finite and >= 0, got {skew}")
        if self.nnz < 0:
            raise ValueError("nnz must be >= 0")
        if self.nnz > math.prod(dims):
            raise CapacityError(f"nnz {self.nnz} exceeds dims capacity {math.prod(dims)}")

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "nnz": self.nnz,
            "skew": list(self.skew),
            "seed": self.seed,
            "name": self.name,
        }


# ---------------------------------------------------------------------------
# FROSTT text format
# ---------------------------------------------------------------------------


def parse_frostt(
    stream: TextIO | str | Iterable[str],
    dims: Sequence[int] | None = None,
    name: str = "tensor",
) -> SparseTensorCOO:
    """Parse FROSTT ``.tns`` text (1-based indices, value last).

    Blank lines and lines starting with ``#`` are skipped. When ``dims`` is
    not given, each mode's size is the largest index seen in that mode.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    num_modes: int | None = None
    entries: list[tuple[tuple[int, ...], float]] = []
    for lineno, line in enumerate(stream, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        tokens = text.split()
        if len(tokens) < 3:
            raise TensorParseError(lineno, f"expected at least 2 indices and a value, got {len(tokens)} tokens")
        if num_modes is None:
            num_modes = len(tokens) - 1
        elif len(tokens) - 1 != num_modes:
            raise TensorParseError(lineno, f"expected {num_modes} indices, got {len(tokens) - 1}")
        try:
            idx = tuple(int(t) for t in tokens[:-1])
        except ValueError:
            raise TensorParseError(lineno, f"non-integer index in {text!r}") from None
        try:
            value = float(tokens[-1])
        except ValueError:
            raise TensorParseError(lineno, f"non-numeric value {tokens[-1]!r}") from None
        if min(idx) < 1:
            raise TensorParseError(lineno, "indices are 1-based; found index < 1")
        entries.append((tuple(i - 1 for i in idx), value))

    if num_modes is None:
        if dims is None:
            raise TensorParseError(0, "no entries and no explicit dims")
        return SparseTensorCOO.from_entries([], dims=dims, name=name)
    if dims is not None:
        if len(dims) != num_modes:
            raise TensorParseError(0, f"dims override has {len(dims)} modes, data has {num_modes}")
        for k, (coords, _) in enumerate(entries):
            if any(c >= d for c, d in zip(coords, dims)):
                raise TensorParseError(0, f"entry {k} exceeds dims override {tuple(dims)}")
    return SparseTensorCOO.from_entries(entries, dims=dims, name=name)


def load_frostt(path: str | Path, dims: Sequence[int] | None = None) -> SparseTensorCOO:
    path = Path(path)
    with path.open() as fh:
        return parse_frostt(fh, dims=dims, name=path.stem)


def serialize_frostt(tensor: SparseTensorCOO) -> str:
    # repr() of a float round-trips exactly
    lines = []
    for row, v in zip(tensor.coords, tensor.values):
        lines.append(" ".join(str(int(c) + 1) for c in row) + " " + repr(float(v)))
    return "\n".join(lines) + ("\n" if lines else "")


def write_frostt(tensor: SparseTensorCOO, path: str | Path) -> None:
    Path(path).write_text(serialize_frostt(tensor))


# ---------------------------------------------------------------------------
# Synthetic tensors
# ---------------------------------------------------------------------------

_DENSE_SAMPLING_LIMIT = 2_000_000
_MAX_REJECTION_ROUNDS = 10_000


def _mode_weights(size: int, skew: float, rng: np.random.Generator) -> np.ndarray:
    # Zipf weights over ranks, scattered across indices by a seeded permutation
    ranks = np.arange(1, size + 1, dtype=np.float64)
    w = ranks ** (-skew) if skew > 0 else np.ones(size)
    w = w / w.sum()
    out = np.empty(size)
    out[rng.permutation(size)] = w
    return out


def generate_synthetic(spec: SyntheticSpec) -> SparseTensorCOO:
    """Deterministic synthetic tensor with exactly ``spec.nnz`` unique coordinates.

    Entries come back in lexicographic coordinate order; values are uniform
    on [0, 1).
    """
    dims = spec.dims
    capacity = math.prod(dims)
    rng = np.random.default_rng(spec.seed)
    weights = [_mode_weights(d, s, rng) for d, s in zip(dims, spec.skew)]

    if spec.nnz == capacity:
        grid = np.indices(dims).reshape(len(dims), -1).T
        coords = grid
    elif capacity <= _DENSE_SAMPLING_LIMIT:
        p = weights[0]
        for w in weights[1:]:
            p = np.outer(p, w).ravel()
        p = p / p.sum()
        # without-replacement sampling needs at least nnz positive weights
        support = int(np.count_nonzero(p))
        if support < spec.nnz:
            p = p + 1e-300
            p = p / p.sum()
        flat = rng.choice(capacity, size=spec.nnz, replace=False, p=p)
        coords = np.stack(np.unravel_index(np.sort(flat), dims), axis=1)
    else:
        coords = _rejection_sample(spec, weights, rng)

    coords = np.asarray(coords, dtype=np.int64).reshape(-1, len(dims))
    order = np.lexsort(coords.T[::-1]) if coords.shape[0] else np.arange(0)
    coords = coords[order]
    values = rng.random(coords.shape[0])
    return SparseTensorCOO(dims, coords, values, spec.name)


def _rejection_sample(spec: SyntheticSpec, weights: list[np.ndarray], rng: np.random.Generator) -> np.ndarray:
    dims = spec.dims
    seen: set[tuple[int, ...]] = set()
    picked: list[tuple[int, ...]] = []
    batch = max(1024, spec.nnz)
    for _ in range(_MAX_REJECTION_ROUNDS):
        cols = [rng.choice(d, size=batch, p=w) for d, w in zip(dims, weights)]
        for row in zip(*(c.tolist() for c in cols)):
            if row not in seen:
                seen.add(row)
                picked.append(row)
                if len(picked) == spec.nnz:
                    return np.array(picked, dtype=np.int64)
    raise CapacityError(
        f"could not draw {spec.nnz} unique coordinates with skew {spec.skew}; lower nnz or skew"
    )


def init_factors(tensor: SparseTensorCOO, rank: int, seed: int = 0) -> list[FactorMatrix]:
    """Uniform [0, 1) factor matrices, one per mode."""
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    rng = np.random.default_rng(seed)
    return [FactorMatrix(m, rng.random((d, rank))) for m, d in enumerate(tensor.dims)]
