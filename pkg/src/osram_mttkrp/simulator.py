"""Trace-driven spMTTKRP accelerator simulation.

Per mode, output rows are split into contiguous per-PE ranges. Each PE owns
one DRAM channel and its own caches. Its factor-row lookups are replayed
through those caches, and its time is the slowest of three resources that
run concurrently:

* compute: ``ceil(nnz * R / pipelines)``
* DRAM: streamed tensor/output bytes plus one random fetch per cache miss
* cache service: hits drained at the on-chip SRAM service rate

The mode takes the slowest PE plus a fixed pipeline fill latency. Only the
cache service term depends on the SRAM technology.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence, TextIO

import numpy as np

from .hypergraph import ModeOrdering, compute_count, sort_for_mode
from .memtech import (
    ONCHIP_BUDGET_BITS,
    OSRAM_PAPER,
    PE_AREA_MM2,
    DramSpec,
    SramTechSpec,
    area_report,
    dram_random_access_cycles,
    dram_stream_cycles,
)
from .tensor_io import SparseTensorCOO
from .uarch import (
    CacheConfig,
    CacheState,
    ConfigError,
    DmaConfig,
    FactorLayout,
    PeConfig,
    cache_service_rate,
    input_cache_map,
    partial_buffer_check,
    pe_compute_cycles,
    service_cycles,
)


class SimulationError(RuntimeError):
    """Simulator precondition or internal invariant violated."""


class UnsortedInputError(SimulationError):
    pass


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AcceleratorConfig:
    pe: PeConfig = field(default_factory=PeConfig)
    cache: CacheConfig = field(default_factory=CacheConfig)
    dma: DmaConfig = field(default_factory=DmaConfig)
    tech: SramTechSpec = OSRAM_PAPER
    dram: DramSpec = field(default_factory=DramSpec)
    element_bytes: int = 4
    index_bytes: int = 4
    compute_energy_per_op: float = 0.5
    onchip_budget_bits: int = ONCHIP_BUDGET_BITS
    pe_area: float = PE_AREA_MM2

    def __post_init__(self):
        if self.cache.tech != self.tech or self.dma.tech != self.tech:
            raise ConfigError("cache and DMA must use the accelerator's on-chip technology")
        if self.tech.block_capacity < 1:
            raise ConfigError("on-chip SRAM block_capacity must be positive")
        if self.element_bytes < 1 or self.index_bytes < 1:
            raise ConfigError("element_bytes and index_bytes must be positive")
        if self.compute_energy_per_op < 0:
            raise ConfigError("compute_energy_per_op must be non-negative")
        if self.allocated_bits > self.onchip_budget_bits:
            raise ConfigError(
                f"on-chip allocation {self.allocated_bits / 8 / 2**20:.2f} MB exceeds the "
                f"{self.onchip_budget_bits / 8 / 2**20:g} MB budget"
            )

    def with_tech(self, tech: SramTechSpec) -> "AcceleratorConfig":
        return replace(
            self,
            tech=tech,
            cache=replace(self.cache, tech=tech),
            dma=replace(self.dma, tech=tech),
        )

    @property
    def cache_bits_per_pe(self) -> int:
        return self.cache.num_caches * self.cache.data_bits if self.cache.enabled else 0

    @property
    def partial_buffer_bits_per_pe(self) -> int:
        return self.pe.partial_buffer_elements * self.element_bytes * 8

    @property
    def allocated_bits(self) -> int:
        per_pe = self.cache_bits_per_pe + self.dma.bits + self.partial_buffer_bits_per_pe
        return self.pe.num_pes * per_pe

    @property
    def sram_blocks(self) -> int:
        return math.ceil(self.allocated_bits / self.tech.block_capacity)

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=float)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PeCycles:
    compute: int
    dram_stream: int
    dram_random: int
    cache_service: int
    nnz: int
    rows: int

    @property
    def dram(self) -> int:
        return self.dram_stream + self.dram_random

    @property
    def busy(self) -> int:
        return max(self.compute, self.dram, self.cache_service)

    @property
    def bottleneck(self) -> str:
        if self.busy == 0:
            return "idle"
        for label, value in (("dram", self.dram), ("cache", self.cache_service), ("compute", self.compute)):
            if value == self.busy:
                return label
        raise AssertionError("unreachable")


@dataclass(frozen=True)
class EnergyBreakdown:
    compute: float
    dram: float
    sram_static: float
    sram_switching: float

    @property
    def total(self) -> float:
        return self.compute + self.dram + self.sram_static + self.sram_switching


@dataclass(frozen=True)
class ModeResult:
    mode: int
    pe_cycles: tuple[PeCycles, ...]
    bottleneck: str
    fill_latency: int
    mode_cycles: int
    hits: int
    misses: int
    evictions: int
    accesses: int
    bytes_dram: int
    dram_elements: int
    switching_bits: int
    op_count: int
    sram_blocks: int
    energy: EnergyBreakdown

    @property
    def floor_cycles(self) -> int:
        """Technology-independent lower bound: slowest PE's max(compute, DRAM) plus fill."""
        return max((max(p.compute, p.dram) for p in self.pe_cycles), default=0) + self.fill_latency

    def energy_terms(self) -> tuple[float, int, float, float, int]:
        """(P_compute, t, E_dram, P_sram_per_block, n_blocks) with powers averaged over the mode."""
        t = self.mode_cycles
        n = self.sram_blocks
        p_compute = self.energy.compute / t
        p_sram = (self.energy.sram_static + self.energy.sram_switching) / (n * t) if n else 0.0
        return p_compute, t, self.energy.dram, p_sram, n

    def to_dict(self) -> dict:
        d = asdict(self)
        d["energy"]["total"] = self.energy.total
        return d


@dataclass(frozen=True)
class RunReport:
    tensor: str
    tech: str
    config_digest: str
    f_electrical: float
    area_mm2: float
    modes: tuple[ModeResult, ...]

    @property
    def total_cycles(self) -> int:
        return sum(m.mode_cycles for m in self.modes)

    @property
    def total_seconds(self) -> float:
        return self.total_cycles / self.f_electrical

    @property
    def total_energy(self) -> float:
        return math.fsum(m.energy.total for m in self.modes)

    def to_dict(self) -> dict:
        return {
            "tensor": self.tensor,
            "tech": self.tech,
            "config_digest": self.config_digest,
            "f_electrical": self.f_electrical,
            "modes": [m.to_dict() for m in self.modes],
            "totals": {
                "cycles": self.total_cycles,
                "seconds": self.total_seconds,
                "energy_pj": self.total_energy,
                "area_mm2": self.area_mm2,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Partitioning
# ---------------------------------------------------------------------------


def _min_max_load(prefix: np.ndarray, num_parts: int) -> int:
    """Smallest achievable max part load over contiguous row-granular splits."""
    total = int(prefix[-1])
    lo = int(np.max(np.diff(prefix))) if prefix.size > 1 else 0
    hi = total

    def feasible(cap: int) -> bool:
        pos, parts = 0, 0
        n = prefix.size - 1
        while pos < n:
            parts += 1
            if parts > num_parts:
                return False
            pos = int(np.searchsorted(prefix, prefix[pos] + cap, side="right")) - 1
        return True

    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def partition_counts(row_nnz: Sequence[int], num_pes: int) -> list[tuple[int, int]]:
    """Contiguous ``[start, stop)`` row ranges per PE, balanced by nonzero count.

    Each PE takes rows until it reaches its even share of the remaining
    nonzeros, never exceeding the optimal bottleneck load. Deterministic.
    """
    if num_pes < 1:
        raise ValueError("num_pes must be >= 1")
    counts = np.asarray(row_nnz, dtype=np.int64)
    n = counts.size
    prefix = np.concatenate([[0], np.cumsum(counts)])
    total = int(prefix[-1])
    best = _min_max_load(prefix, num_pes)

    ranges, pos = [], 0
    for p in range(num_pes - 1):
        base = int(prefix[pos])
        share = -(-(total - base) // (num_pes - p))
        reach = int(np.searchsorted(prefix, base + share, side="left"))
        cap = int(np.searchsorted(prefix, base + best, side="right")) - 1
        stop = min(max(pos, min(reach, cap)), n)
        ranges.append((pos, stop))
        pos = stop
    ranges.append((pos, n))

    if max(int(prefix[b] - prefix[a]) for a, b in ranges) > best:
        # plain first-fit at the optimal cap is always feasible
        ranges, pos = [], 0
        for p in range(num_pes - 1):
            stop = int(np.searchsorted(prefix, prefix[pos] + best, side="right")) - 1
            ranges.append((pos, max(pos, stop)))
            pos = max(pos, stop)
        ranges.append((pos, n))
    return ranges


def partition(tensor: SparseTensorCOO, mode: int, num_pes: int) -> list[tuple[int, int]]:
    counts = np.bincount(tensor.coords[:, mode], minlength=tensor.dims[mode])
    return partition_counts(counts, num_pes)


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


def simulate_mode(
    tensor: SparseTensorCOO,
    layout: FactorLayout,
    mode: int,
    config: AcceleratorConfig,
    ordering: ModeOrdering | None = None,
    trace: TextIO | None = None,
) -> ModeResult:
    """Replay one output mode and return its cycle and energy breakdown.

    ``trace`` receives one line per cache lookup:
    ``<pe> <cache> <address hex> <input mode> <H|M>``.
    """
    n_modes = tensor.num_modes
    if not 0 <= mode < n_modes:
        raise SimulationError(f"mode {mode} out of range")
    if layout.dims != tensor.dims or layout.element_bytes != config.element_bytes:
        raise SimulationError("factor layout does not match tensor/config")
    if layout.line_bytes != config.cache.line_bytes:
        raise SimulationError("factor layout line size differs from cache line size")
    rank = layout.rank
    try:
        partial_buffer_check(config.pe, rank)
    except ConfigError as exc:
        raise SimulationError(str(exc)) from exc
    if ordering is None:
        ordering = sort_for_mode(tensor, mode)
    elif ordering.mode != mode or not ordering.is_valid_for(tensor):
        raise UnsortedInputError(f"ordering is not an output-major sort for mode {mode}")

    f = config.pe.f_electrical
    cache_cfg = config.cache
    coords = tensor.coords[ordering.permutation]
    ranges = partition(tensor, mode, config.pe.num_pes)
    row_counts = np.bincount(coords[:, mode], minlength=tensor.dims[mode]) if tensor.nnz else np.zeros(tensor.dims[mode], np.int64)
    row_prefix = np.concatenate([[0], np.cumsum(row_counts)])

    inputs = [k for k in range(n_modes) if k != mode]
    cache_of = input_cache_map(n_modes, mode, cache_cfg.num_caches)
    line = cache_cfg.line_bytes
    access_bits = min(layout.row_bytes, line) * 8
    rate = cache_service_rate(cache_cfg, f, access_bits)
    miss_cycles = dram_random_access_cycles(config.dram, f, nbytes=line)
    element_fetch_cycles = dram_random_access_cycles(config.dram, f, nbytes=layout.row_bytes)
    nnz_bytes = n_modes * config.index_bytes + config.element_bytes

    # first/last line number of every input factor row touched, per nonzero
    bases = layout.bases
    first_line = {k: (bases[k] + coords[:, k] * layout.row_bytes) // line for k in inputs}
    last_line = {k: (bases[k] + coords[:, k] * layout.row_bytes + layout.row_bytes - 1) // line for k in inputs}

    pe_results = []
    hits = misses = evictions = accesses = 0
    bytes_dram = dram_elements = switching_bits = 0
    for pe_id, (r0, r1) in enumerate(ranges):
        e0, e1 = int(row_prefix[r0]), int(row_prefix[r1])
        nnz_pe, rows_pe = e1 - e0, r1 - r0
        stream_bytes = nnz_pe * nnz_bytes + rows_pe * layout.row_bytes
        pe_hits = [0] * cache_cfg.num_caches
        pe_misses = 0

        if cache_cfg.enabled:
            states = [CacheState(cache_cfg) for _ in range(cache_cfg.num_caches)]
            firsts = [first_line[k][e0:e1].tolist() for k in inputs]
            lasts = [last_line[k][e0:e1].tolist() for k in inputs]
            caches = [cache_of[k] for k in inputs]
            for i in range(nnz_pe):
                for j, k in enumerate(inputs):
                    c = caches[j]
                    st = states[c]
                    for ln in range(firsts[j][i], lasts[j][i] + 1):
                        res = st.access(ln * line)
                        if trace is not None:
                            trace.write(f"{pe_id} {c} {ln * line:#x} {k} {'H' if res.hit else 'M'}\n")
            for c, st in enumerate(states):
                pe_hits[c] = st.hits
                pe_misses += st.misses
                evictions += st.evictions
                accesses += st.accesses
            dram_random = pe_misses * miss_cycles
            fetched_bytes = pe_misses * line
            fetched_elements = fetched_bytes // config.element_bytes
            switching_bits += sum(pe_hits) * access_bits + pe_misses * line * 8
        else:
            # element-wise DMA transfer of each factor row
            fetches = nnz_pe * len(inputs)
            dram_random = fetches * element_fetch_cycles
            fetched_bytes = fetches * layout.row_bytes
            fetched_elements = fetches * rank
            switching_bits += fetched_bytes * 8

        hits += sum(pe_hits)
        misses += pe_misses
        bytes_dram += stream_bytes + fetched_bytes
        dram_elements += nnz_pe + fetched_elements + rows_pe * rank
        # DMA buffer traversal for streamed data, one partial-sum row write per nonzero
        switching_bits += stream_bytes * 8 + nnz_pe * rank * config.element_bytes * 8

        pe_results.append(
            PeCycles(
                compute=pe_compute_cycles(nnz_pe, rank, config.pe.pipelines_per_pe),
                dram_stream=dram_stream_cycles(stream_bytes, config.dram, f),
                dram_random=dram_random,
                cache_service=max((service_cycles(h, rate) for h in pe_hits), default=0),
                nnz=nnz_pe,
                rows=rows_pe,
            )
        )

    critical = max(pe_results, key=lambda p: p.busy)
    mode_cycles = critical.busy + cache_cfg.fill_latency
    ops = compute_count(n_modes, tensor.nnz, rank)
    blocks = config.sram_blocks
    tech = config.tech
    energy = EnergyBreakdown(
        compute=ops * config.compute_energy_per_op,
        dram=bytes_dram * 8 * config.dram.energy_per_bit,
        sram_static=blocks * tech.block_capacity * tech.static_energy_per_bit * mode_cycles,
        sram_switching=switching_bits * tech.switching_energy_per_bit,
    )
    return ModeResult(
        mode=mode,
        pe_cycles=tuple(pe_results),
        bottleneck=critical.bottleneck,
        fill_latency=cache_cfg.fill_latency,
        mode_cycles=mode_cycles,
        hits=hits,
        misses=misses,
        evictions=evictions,
        accesses=accesses,
        bytes_dram=bytes_dram,
        dram_elements=dram_elements,
        switching_bits=switching_bits,
        op_count=ops,
        sram_blocks=blocks,
        energy=energy,
    )


def simulate_all_modes(tensor: SparseTensorCOO, config: AcceleratorConfig, rank: int = 16) -> RunReport:
    layout = FactorLayout(tensor.dims, rank, config.element_bytes, config.cache.line_bytes)
    modes = tuple(simulate_mode(tensor, layout, m, config) for m in range(tensor.num_modes))
    area = area_report(config.onchip_budget_bits, config.tech, config.pe_area)
    return RunReport(
        tensor=tensor.name,
        tech=config.tech.name,
        config_digest=config.digest(),
        f_electrical=config.pe.f_electrical,
        area_mm2=area.total,
        modes=modes,
    )


def energy_total(p_compute: float, t_cycles: float, e_dram: float, p_sram_per_block: float, n_blocks: int) -> float:
    """Accelerator energy in pJ: compute power and per-block SRAM power over the run, plus DRAM energy."""
    return p_compute * t_cycles + e_dram + p_sram_per_block * n_blocks * t_cycles


# ---------------------------------------------------------------------------
# Comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModeRatio:
    mode: int
    speedup: float
    energy_savings: float


@dataclass(frozen=True)
class Comparison:
    """``candidate`` measured against ``baseline``; ratios are baseline / candidate."""

    candidate: RunReport
    baseline: RunReport
    modes: tuple[ModeRatio, ...]
    speedup: float
    energy_savings: float

    def to_dict(self) -> dict:
        return {
            "tensor": self.candidate.tensor,
            "candidate": self.candidate.tech,
            "baseline": self.baseline.tech,
            "modes": [asdict(m) for m in self.modes],
            "totals": {"speedup": self.speedup, "energy_savings": self.energy_savings},
        }


def compare(candidate: RunReport, baseline: RunReport) -> Comparison:
    if candidate.tensor != baseline.tensor or len(candidate.modes) != len(baseline.modes):
        raise ValueError(
            f"reports cover different workloads: {candidate.tensor!r} ({len(candidate.modes)} modes) "
            f"vs {baseline.tensor!r} ({len(baseline.modes)} modes)"
        )
    ratios = tuple(
        ModeRatio(a.mode, b.mode_cycles / a.mode_cycles, b.energy.total / a.energy.total)
        for a, b in zip(candidate.modes, baseline.modes)
    )
    return Comparison(
        candidate,
        baseline,
        ratios,
        baseline.total_cycles / candidate.total_cycles,
        baseline.total_energy / candidate.total_energy,
    )
