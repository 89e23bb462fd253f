"""Performance and energy model of a sparse MTTKRP FPGA accelerator with optical or electrical on-chip SRAM."""

from .hypergraph import build_hypergraph, compute_count, sort_for_mode, traffic_count
from .kernel import mttkrp_dense_oracle, mttkrp_mode
from .memtech import ESRAM_PAPER, OSRAM_PAPER, bits_per_electrical_cycle, sram_block_power
from .simulator import AcceleratorConfig, compare, energy_total, simulate_all_modes, simulate_mode
from .tensor_io import SparseTensorCOO, SyntheticSpec, generate_synthetic, init_factors, parse_frostt

__version__ = "0.1.0"
