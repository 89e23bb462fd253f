"""Memory technology models: SRAM block throughput and power, DRAM timing, area.

Energies are in pJ. SRAM power is expressed per 500 MHz electrical cycle, the
unit of the published per-bit constants.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Literal

MB_BITS = 2**20 * 8
ONCHIP_BUDGET_BITS = 54 * MB_BITS
F_ELECTRICAL_HZ = 500e6
PE_AREA_MM2 = 202.2
# Published total for the E-SRAM system; its components sum to 245.4.
PUBLISHED_ESRAM_TOTAL_AREA_MM2 = 247.2


class ModelViolation(ValueError):
    """A request the modeled hardware cannot service."""


@dataclass(frozen=True)
class SramTechSpec:
    name: str
    kind: Literal["optical", "electrical"]
    f_mem: float
    wavelengths: int
    port_width: int
    port_count: int
    block_capacity: int
    static_energy_per_bit: float
    switching_energy_per_bit: float
    area_per_bit: float

    def __post_init__(self):
        if self.kind not in ("optical", "electrical"):
            raise ValueError(f"kind must be 'optical' or 'electrical', got {self.kind!r}")
        for name in ("f_mem", "wavelengths", "port_width", "port_count",
                     "static_energy_per_bit", "switching_energy_per_bit", "area_per_bit"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.block_capacity < 0:
            raise ValueError("block_capacity must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DramSpec:
    channels: int = 4
    bandwidth_per_channel: float = 19.2e9
    random_access_latency: int = 32
    burst_bytes: int = 64
    energy_per_bit: float = 20.0

    def __post_init__(self):
        if self.channels < 1 or self.burst_bytes < 1 or not self.bandwidth_per_channel > 0:
            raise ValueError("DRAM channels, burst_bytes and bandwidth must be positive")
        if self.random_access_latency < 0 or self.energy_per_bit < 0:
            raise ValueError("DRAM latency and energy must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class AreaModel:
    onchip_memory_area: float
    pe_area: float

    @property
    def total(self) -> float:
        return self.onchip_memory_area + self.pe_area


OSRAM_PAPER = SramTechSpec(
    name="osram-paper",
    kind="optical",
    f_mem=20e9,
    wavelengths=5,
    port_width=32,
    port_count=200,
    block_capacity=32 * 1024,
    static_energy_per_bit=4.17e-6,
    switching_energy_per_bit=1.04,
    area_per_bit=103.7e4 / ONCHIP_BUDGET_BITS,
)

ESRAM_PAPER = SramTechSpec(
    name="esram-paper",
    kind="electrical",
    f_mem=500e6,
    wavelengths=1,
    port_width=32,
    port_count=2,
    block_capacity=32 * 1024,
    static_energy_per_bit=1.175e-6,
    switching_energy_per_bit=4.68,
    area_per_bit=43.2 / ONCHIP_BUDGET_BITS,
)

PRESETS: dict[str, SramTechSpec] = {s.name: s for s in (OSRAM_PAPER, ESRAM_PAPER)}


def bits_per_electrical_cycle(spec: SramTechSpec, f_electrical: float = F_ELECTRICAL_HZ) -> int:
    """Bits one block hands the electrical fabric per fabric cycle.

    wavelengths x memory clock x port width / fabric clock, floored.
    """
    if not f_electrical > 0:
        raise ValueError("f_electrical must be positive")
    num = Fraction(spec.wavelengths) * Fraction(spec.f_mem) * Fraction(spec.port_width)
    return math.floor(num / Fraction(f_electrical))


def block_service_bits(spec: SramTechSpec, f_electrical: float = F_ELECTRICAL_HZ) -> int:
    """Deliverable bits per fabric cycle, the larger of the clock-rate bound and the port bound.

    For the optical preset both equal 6400. For a dual-port electrical block
    the port bound (2 x 32) is the binding description.
    """
    return max(bits_per_electrical_cycle(spec, f_electrical), spec.port_count * spec.port_width)


def sram_block_power(spec: SramTechSpec, active_bits: int, f_electrical: float = F_ELECTRICAL_HZ) -> float:
    """Static plus switching energy of one block in one fabric cycle, in pJ."""
    if active_bits < 0:
        raise ValueError("active_bits must be non-negative")
    if spec.block_capacity == 0:
        return 0.0
    limit = block_service_bits(spec, f_electrical)
    if active_bits > limit:
        raise ModelViolation(f"{active_bits} active bits exceed the {limit} bits/cycle a {spec.name} block serves")
    return spec.block_capacity * spec.static_energy_per_bit + active_bits * spec.switching_energy_per_bit


def _bytes_per_cycle(spec: DramSpec, f_electrical: float) -> Fraction | None:
    if math.isinf(spec.bandwidth_per_channel):
        return None
    return Fraction(spec.bandwidth_per_channel) / Fraction(f_electrical)


def dram_stream_cycles(nbytes: int, spec: DramSpec, f_electrical: float = F_ELECTRICAL_HZ) -> int:
    if nbytes < 0:
        raise ValueError("byte count must be non-negative")
    rate = _bytes_per_cycle(spec, f_electrical)
    if rate is None or nbytes == 0:
        return 0
    return math.ceil(Fraction(nbytes) / rate)


def dram_random_access_cycles(spec: DramSpec, f_electrical: float = F_ELECTRICAL_HZ, nbytes: int | None = None) -> int:
    """Latency plus transfer time for one random fetch (a burst unless ``nbytes`` is given)."""
    size = spec.burst_bytes if nbytes is None else nbytes
    return spec.random_access_latency + dram_stream_cycles(size, spec, f_electrical)


def area_report(memory_bits: int, tech: SramTechSpec, pe_area: float = PE_AREA_MM2) -> AreaModel:
    if memory_bits < 0:
        raise ValueError("memory_bits must be non-negative")
    return AreaModel(memory_bits * tech.area_per_bit, pe_area)
