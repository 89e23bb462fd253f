"""Experiment config documents: defaults, validation and object construction.

A config is a JSON object with four sections, ``accelerator``,
``memory_tech``, ``dram`` and ``workload``. Missing fields take the
published accelerator defaults. Unknown keys are rejected. Validation
collects every problem before failing.
"""

from __future__ import annotations

import copy
import json
from dataclasses import asdict
from pathlib import Path
from typing import Any

from .memtech import ONCHIP_BUDGET_BITS, PE_AREA_MM2, PRESETS, DramSpec, SramTechSpec
from .simulator import AcceleratorConfig
from .tensor_io import SyntheticSpec
from .uarch import CacheConfig, ConfigError, DmaConfig, PeConfig

CONFIG_ENV_VAR = "OSRAM_MTTKRP_CONFIG"

ACCELERATOR_DEFAULTS: dict[str, Any] = {
    "num_pes": 4,
    "pipelines_per_pe": 80,
    "partial_buffer_elements": 1024,
    "f_electrical": 500e6,
    "num_caches": 3,
    "associativity": 4,
    "num_lines": 4096,
    "line_bytes": 64,
    "pe_pipeline_stages": 4,
    "cache_enabled": True,
    "service_blocks": 1,
    "dma_buffer_count": 6,
    "dma_buffer_bytes": 64 * 1024,
    "element_bytes": 4,
    "index_bytes": 4,
    "compute_energy_per_op": 0.5,
    "onchip_budget_bits": ONCHIP_BUDGET_BITS,
    "pe_area": PE_AREA_MM2,
}

DRAM_DEFAULTS: dict[str, Any] = asdict(DramSpec())

WORKLOAD_DEFAULTS: dict[str, Any] = {
    "rank": 16,
    "seed": None,  # overrides the synthetic tensor's own seed when set
    "tensor": None,
    "synthetic": None,
}

TECH_DEFAULTS = {"candidate": "osram-paper", "baseline": "esram-paper"}

_INT, _FLOAT, _BOOL = "int", "float", "bool"

_ACCEL_TYPES = {
    "num_pes": _INT, "pipelines_per_pe": _INT, "partial_buffer_elements": _INT,
    "f_electrical": _FLOAT, "num_caches": _INT, "associativity": _INT, "num_lines": _INT,
    "line_bytes": _INT, "pe_pipeline_stages": _INT, "cache_enabled": _BOOL,
    "service_blocks": _INT, "dma_buffer_count": _INT, "dma_buffer_bytes": _INT,
    "element_bytes": _INT, "index_bytes": _INT, "compute_energy_per_op": _FLOAT,
    "onchip_budget_bits": _INT, "pe_area": _FLOAT,
}
_NULLABLE = {"service_blocks"}
_DRAM_TYPES = {
    "channels": _INT, "bandwidth_per_channel": _FLOAT, "random_access_latency": _INT,
    "burst_bytes": _INT, "energy_per_bit": _FLOAT,
}
_TECH_TYPES = {
    "f_mem": _FLOAT, "wavelengths": _INT, "port_width": _INT, "port_count": _INT,
    "block_capacity": _INT, "static_energy_per_bit": _FLOAT,
    "switching_energy_per_bit": _FLOAT, "area_per_bit": _FLOAT,
}
_SYNTH_KEYS = {"dims", "nnz", "skew", "seed", "name"}


class ConfigInvalid(ValueError):
    """Raised with every validation problem found, each prefixed by its field path."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def _coerce(value: Any, kind: str, path: str, errors: list[str], nullable: bool = False) -> Any:
    if value is None and nullable:
        return None
    if kind == _BOOL:
        if isinstance(value, bool):
            return value
        errors.append(f"{path}: expected boolean, got {value!r}")
    elif kind == _INT:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
        errors.append(f"{path}: expected integer, got {value!r}")
    else:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
        errors.append(f"{path}: expected number, got {value!r}")
    return None


def _section(doc: dict, name: str, errors: list[str]) -> dict:
    sec = doc.get(name, {})
    if sec is None:
        return {}
    if not isinstance(sec, dict):
        errors.append(f"{name}: expected an object")
        return {}
    return sec


def _typed_section(raw: dict, defaults: dict, types: dict, prefix: str, errors: list[str]) -> dict:
    out = {}
    for key in raw:
        if key not in defaults:
            errors.append(f"{prefix}.{key}: unknown key")
    for key, default in defaults.items():
        value = raw.get(key, default)
        out[key] = _coerce(value, types[key], f"{prefix}.{key}", errors, key in _NULLABLE)
    return out


def _tech(raw: Any, path: str, errors: list[str]) -> dict | None:
    if isinstance(raw, str):
        raw = {"preset": raw}
    if not isinstance(raw, dict):
        errors.append(f"{path}: expected a preset name or an object")
        return None
    allowed = set(_TECH_TYPES) | {"preset", "name", "kind"}
    for key in raw:
        if key not in allowed:
            errors.append(f"{path}.{key}: unknown key")
    base: dict[str, Any] = {}
    if "preset" in raw:
        preset = PRESETS.get(raw["preset"])
        if preset is None:
            errors.append(f"{path}.preset: unknown preset {raw['preset']!r}; choose from {sorted(PRESETS)}")
            return None
        base = asdict(preset)
    out: dict[str, Any] = {}
    for key in ("name", "kind"):
        value = raw.get(key, base.get(key))
        if not isinstance(value, str):
            errors.append(f"{path}.{key}: required string")
        out[key] = value
    for key, kind in _TECH_TYPES.items():
        if key not in raw and key not in base:
            errors.append(f"{path}.{key}: required")
            continue
        out[key] = _coerce(raw.get(key, base.get(key)), kind, f"{path}.{key}", errors)
    try:
        SramTechSpec(**out)
    except (TypeError, ValueError) as exc:
        errors.append(f"{path}: {exc}")
    return out


def _synthetic(raw: Any, path: str, errors: list[str]) -> dict | str | None:
    from .workloads import BUNDLED

    if raw is None:
        return None
    if isinstance(raw, str):
        if raw not in BUNDLED:
            errors.append(f"{path}: unknown bundled workload {raw!r}; choose from {sorted(BUNDLED)}")
        return raw
    if not isinstance(raw, dict):
        errors.append(f"{path}: expected a bundled workload name or an object")
        return None
    for key in raw:
        if key not in _SYNTH_KEYS:
            errors.append(f"{path}.{key}: unknown key")
    try:
        spec = SyntheticSpec(
            tuple(raw["dims"]), int(raw["nnz"]), raw.get("skew", 0.0), int(raw.get("seed", 0)),
            str(raw.get("name", "synthetic")),
        )
    except KeyError as exc:
        errors.append(f"{path}.{exc.args[0]}: required")
        return None
    except (TypeError, ValueError) as exc:
        errors.append(f"{path}: {exc}")
        return None
    return spec.to_dict()


def validate_config(doc: dict | None) -> dict:
    """Return the fully populated config or raise :class:`ConfigInvalid`."""
    doc = {} if doc is None else doc
    errors: list[str] = []
    if not isinstance(doc, dict):
        raise ConfigInvalid(["<root>: expected an object"])
    for key in doc:
        if key not in ("accelerator", "memory_tech", "dram", "workload"):
            errors.append(f"{key}: unknown section")

    accel = _typed_section(_section(doc, "accelerator", errors), ACCELERATOR_DEFAULTS, _ACCEL_TYPES, "accelerator", errors)
    dram = _typed_section(_section(doc, "dram", errors), DRAM_DEFAULTS, _DRAM_TYPES, "dram", errors)

    raw_tech = _section(doc, "memory_tech", errors)
    tech = {}
    for key in raw_tech:
        if key not in TECH_DEFAULTS:
            errors.append(f"memory_tech.{key}: unknown key")
    for key, default in TECH_DEFAULTS.items():
        tech[key] = _tech(raw_tech.get(key, default), f"memory_tech.{key}", errors)

    raw_work = _section(doc, "workload", errors)
    work: dict[str, Any] = {}
    for key in raw_work:
        if key not in WORKLOAD_DEFAULTS:
            errors.append(f"workload.{key}: unknown key")
    work["rank"] = _coerce(raw_work.get("rank", 16), _INT, "workload.rank", errors)
    work["seed"] = _coerce(raw_work.get("seed"), _INT, "workload.seed", errors, nullable=True)
    tensor = raw_work.get("tensor")
    if tensor is not None and not isinstance(tensor, str):
        errors.append("workload.tensor: expected a path string")
    work["tensor"] = tensor
    work["synthetic"] = _synthetic(raw_work.get("synthetic"), "workload.synthetic", errors)
    if work["tensor"] is not None and work["synthetic"] is not None:
        errors.append("workload: set at most one of tensor and synthetic")

    normalized = {"accelerator": accel, "memory_tech": tech, "dram": dram, "workload": work}
    errors.extend(_semantic_errors(normalized, structural_ok=not errors))
    if errors:
        raise ConfigInvalid(errors)
    return normalized


_POSITIVE = (
    "num_pes", "pipelines_per_pe", "partial_buffer_elements", "f_electrical", "num_caches",
    "associativity", "num_lines", "line_bytes", "pe_pipeline_stages", "dma_buffer_count",
    "dma_buffer_bytes", "element_bytes", "index_bytes", "onchip_budget_bits",
)


def _semantic_errors(cfg: dict, structural_ok: bool) -> list[str]:
    """Cross-field rules. Each rule runs whenever its own inputs parsed."""
    errors = []
    a, work, dram = cfg["accelerator"], cfg["workload"], cfg["dram"]

    def ok(*values):
        return all(v is not None for v in values)

    for key in _POSITIVE:
        if ok(a[key]) and not a[key] > 0:
            errors.append(f"accelerator.{key}: must be positive, got {a[key]}")
    for key in ("compute_energy_per_op", "pe_area"):
        if ok(a[key]) and a[key] < 0:
            errors.append(f"accelerator.{key}: must be non-negative, got {a[key]}")
    if ok(a["service_blocks"]) and a["service_blocks"] < 1:
        errors.append(f"accelerator.service_blocks: must be >= 1 or null, got {a['service_blocks']}")
    if ok(a["num_lines"], a["associativity"]) and a["associativity"] > 0 and a["num_lines"] % a["associativity"]:
        errors.append(
            f"accelerator.associativity: num_lines {a['num_lines']} is not divisible by associativity {a['associativity']}"
        )
    if ok(a["line_bytes"]) and a["line_bytes"] > 0 and a["line_bytes"] & (a["line_bytes"] - 1):
        errors.append(f"accelerator.line_bytes: {a['line_bytes']} is not a power of two")

    rank = work["rank"]
    if ok(rank) and rank < 1:
        errors.append(f"workload.rank: must be >= 1, got {rank}")
    elif ok(rank, a["partial_buffer_elements"]) and rank > a["partial_buffer_elements"]:
        errors.append(
            f"workload.rank: rank {rank} exceeds accelerator.partial_buffer_elements "
            f"{a['partial_buffer_elements']}; one output row must fit in the partial-sum buffer"
        )
    if ok(dram["channels"], a["num_pes"]) and dram["channels"] != a["num_pes"]:
        errors.append(
            f"dram.channels: {dram['channels']} channels for {a['num_pes']} PEs; each PE owns exactly one channel"
        )
    if ok(*dram.values()):
        try:
            DramSpec(**dram)
        except ValueError as exc:
            errors.append(f"dram: {exc}")

    if structural_ok and not errors:
        # remaining invariants (on-chip budget) live on the config objects
        for which in ("candidate", "baseline"):
            try:
                build_accelerator(cfg, which)
            except (ConfigError, ValueError) as exc:
                msg = f"accelerator: {exc}"
                if msg not in errors:
                    errors.append(msg)
    return errors


def _build_parts(cfg: dict) -> tuple[PeConfig, CacheConfig, DmaConfig]:
    a = cfg["accelerator"]
    pe = PeConfig(a["num_pes"], a["pipelines_per_pe"], a["partial_buffer_elements"], a["f_electrical"])
    cache = CacheConfig(
        num_caches=a["num_caches"], associativity=a["associativity"], num_lines=a["num_lines"],
        line_bytes=a["line_bytes"], pe_pipeline_stages=a["pe_pipeline_stages"],
        enabled=a["cache_enabled"], service_blocks=a["service_blocks"],
    )
    dma = DmaConfig(a["dma_buffer_count"], a["dma_buffer_bytes"])
    return pe, cache, dma


def tech_spec(cfg: dict, which: str) -> SramTechSpec:
    return SramTechSpec(**cfg["memory_tech"][which])


def build_accelerator(cfg: dict, which: str = "candidate") -> AcceleratorConfig:
    """AcceleratorConfig for a validated config, using the ``which`` memory technology."""
    a = cfg["accelerator"]
    pe, cache, dma = _build_parts(cfg)
    tech = tech_spec(cfg, which)
    base = AcceleratorConfig(
        pe=pe,
        cache=cache,
        dma=dma,
        dram=DramSpec(**cfg["dram"]),
        element_bytes=a["element_bytes"],
        index_bytes=a["index_bytes"],
        compute_energy_per_op=a["compute_energy_per_op"],
        onchip_budget_bits=a["onchip_budget_bits"],
        pe_area=a["pe_area"],
    )
    return base.with_tech(tech)


def load_config(path: str | Path | None) -> dict:
    """Read and validate a config file; ``None`` means all defaults."""
    if path is None:
        return validate_config({})
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigInvalid([f"{path}: config file not found"]) from None
    except json.JSONDecodeError as exc:
        raise ConfigInvalid([f"{path}: invalid JSON: {exc}"]) from None
    return validate_config(doc)


def with_overrides(cfg: dict, **workload: Any) -> dict:
    """Copy of ``cfg`` with non-None workload fields replaced, re-validated."""
    doc = copy.deepcopy(cfg)
    for key, value in workload.items():
        if value is not None:
            doc["workload"][key] = value
    if workload.get("tensor") is not None:
        doc["workload"]["synthetic"] = None
    if workload.get("synthetic") is not None:
        doc["workload"]["tensor"] = None
    return validate_config(doc)


def megabytes(bits: int) -> float:
    return bits / 8 / 2**20

