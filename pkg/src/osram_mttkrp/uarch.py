"""Microarchitecture blocks: set-associative LRU caches, DMA and PE models."""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

from .memtech import OSRAM_PAPER, SramTechSpec, block_service_bits

SYNC_INTERFACE_CYCLES = 2


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CacheConfig:
    """Per-PE cache subsystem. ``num_lines`` counts lines in one cache.

    ``service_blocks`` is how many SRAM blocks serve a single lookup in
    parallel. ``None`` aggregates every block of the data array.
    """

    num_caches: int = 3
    associativity: int = 4
    num_lines: int = 4096
    line_bytes: int = 64
    pe_pipeline_stages: int = 4
    tech: SramTechSpec = OSRAM_PAPER
    enabled: bool = True
    service_blocks: int | None = 1

    def __post_init__(self):
        if min(self.num_caches, self.associativity, self.num_lines, self.line_bytes) < 1:
            raise ConfigError("cache geometry fields must be positive")
        if self.num_lines % self.associativity:
            raise ConfigError(f"num_lines {self.num_lines} not divisible by associativity {self.associativity}")
        if self.line_bytes & (self.line_bytes - 1):
            raise ConfigError(f"line_bytes {self.line_bytes} is not a power of two")
        if self.pe_pipeline_stages < 1:
            raise ConfigError("pe_pipeline_stages must be positive")
        if self.service_blocks is not None and self.service_blocks < 1:
            raise ConfigError("service_blocks must be positive or None")

    @property
    def num_sets(self) -> int:
        return self.num_lines // self.associativity

    @property
    def data_bits(self) -> int:
        return self.num_lines * self.line_bytes * 8

    @property
    def fill_latency(self) -> int:
        return self.pe_pipeline_stages + SYNC_INTERFACE_CYCLES


@dataclass(frozen=True)
class DmaConfig:
    buffer_count: int = 6
    buffer_bytes: int = 64 * 1024
    tech: SramTechSpec = OSRAM_PAPER

    def __post_init__(self):
        if self.buffer_count < 1 or self.buffer_bytes < 1:
            raise ConfigError("DMA buffer count and size must be positive")

    @property
    def bits(self) -> int:
        return self.buffer_count * self.buffer_bytes * 8


@dataclass(frozen=True)
class PeConfig:
    num_pes: int = 4
    pipelines_per_pe: int = 80
    partial_buffer_elements: int = 1024
    f_electrical: float = 500e6

    def __post_init__(self):
        if min(self.num_pes, self.pipelines_per_pe, self.partial_buffer_elements) < 1:
            raise ConfigError("PE fields must be positive")
        if not self.f_electrical > 0:
            raise ConfigError("f_electrical must be positive")


class AccessResult(NamedTuple):
    hit: bool
    evicted: int | None  # line number of the victim, if any


@dataclass
class CacheState:
    """Tag store of one set-associative LRU cache.

    Each set is an OrderedDict of resident line numbers, least recently used
    first.
    """

    config: CacheConfig
    sets: list[OrderedDict] = field(init=False)
    hits: int = 0
    misses: int = 0
    evictions: int = 0
    accesses: int = 0

    def __post_init__(self):
        self.sets = [OrderedDict() for _ in range(self.config.num_sets)]

    def access(self, address: int, is_write: bool = False) -> AccessResult:
        line = address // self.config.line_bytes
        ways = self.sets[line % self.config.num_sets]
        self.accesses += 1
        if line in ways:
            ways.move_to_end(line)
            self.hits += 1
            return AccessResult(True, None)
        self.misses += 1
        victim = None
        if len(ways) >= self.config.associativity:
            victim, _ = ways.popitem(last=False)
            self.evictions += 1
        ways[line] = True
        return AccessResult(False, victim)


def cache_access(state: CacheState, config: CacheConfig, address: int, is_write: bool = False) -> AccessResult:
    if config is not state.config and config != state.config:
        raise ValueError("state was built for a different cache config")
    return state.access(address, is_write)


def cache_service_rate(config: CacheConfig, f_electrical: float, row_bits: int) -> Fraction:
    """Lookups served per fabric cycle, as an exact rational.

    Whole requests per cycle when the backing blocks deliver at least one row
    per cycle, otherwise one request every ``ceil(row_bits / bits)`` cycles.
    """
    if row_bits <= 0:
        raise ValueError("row_bits must be positive")
    if config.service_blocks is not None:
        blocks = config.service_blocks
    else:
        blocks = math.ceil(config.data_bits / config.tech.block_capacity)
    total = block_service_bits(config.tech, f_electrical) * blocks
    if total >= row_bits:
        return Fraction(total // row_bits)
    return Fraction(1, math.ceil(row_bits / total))


def service_cycles(requests: int, rate: Fraction) -> int:
    return math.ceil(Fraction(requests) / rate) if requests else 0


def pe_compute_cycles(nnz_assigned: int, rank: int, pipelines: int) -> int:
    if pipelines < 1:
        raise ValueError("pipelines must be >= 1")
    return math.ceil(nnz_assigned * rank / pipelines)


def partial_buffer_check(pe: PeConfig, rank: int) -> int:
    """Output rows the partial-sum buffer holds at rank ``rank``."""
    if rank < 1:
        raise ValueError("rank must be >= 1")
    if rank > pe.partial_buffer_elements:
        raise ConfigError(
            f"rank {rank} exceeds partial_buffer_elements {pe.partial_buffer_elements}; one output row must fit"
        )
    return pe.partial_buffer_elements // rank


@dataclass(frozen=True)
class FactorLayout:
    """Disjoint, line-aligned address regions for each factor matrix."""

    dims: tuple[int, ...]
    rank: int
    element_bytes: int = 4
    line_bytes: int = 64

    @property
    def row_bytes(self) -> int:
        return self.rank * self.element_bytes

    @property
    def bases(self) -> tuple[int, ...]:
        out, base = [], 0
        for d in self.dims:
            out.append(base)
            size = d * self.row_bytes
            base += -(-size // self.line_bytes) * self.line_bytes
        return tuple(out)

    def row_address(self, mode: int, row: int) -> int:
        return self.bases[mode] + row * self.row_bytes

    def row_lines(self, mode: int, row: int) -> range:
        """Line-aligned addresses a factor row spans."""
        start = self.row_address(mode, row)
        first = start // self.line_bytes
        last = (start + self.row_bytes - 1) // self.line_bytes
        return range(first * self.line_bytes, (last + 1) * self.line_bytes, self.line_bytes)


def input_cache_map(num_modes: int, out_mode: int, num_caches: int) -> dict[int, int]:
    """Cache index serving each input mode: input modes in order, round-robin."""
    inputs: Sequence[int] = [k for k in range(num_modes) if k != out_mode]
    return {k: j % num_caches for j, k in enumerate(inputs)}

