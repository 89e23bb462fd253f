"""Compare O-SRAM against E-SRAM on every bundled workload.

Writes one comparison CSV/JSON per workload under --out and prints a
speedup / energy-savings table.

    python scripts/run_trend_experiment.py --out results/trend
"""

import argparse
import time
from pathlib import Path

from osram_mttkrp.config import build_accelerator, load_config
from osram_mttkrp.report import write_reports
from osram_mttkrp.simulator import compare, simulate_all_modes
from osram_mttkrp.tensor_io import generate_synthetic
from osram_mttkrp.workloads import BUNDLED


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--config", help="config JSON (defaults if omitted)")
    ap.add_argument("--out", default="results/trend")
    ap.add_argument("--workloads", nargs="*", default=list(BUNDLED), choices=list(BUNDLED))
    args = ap.parse_args()

    cfg = load_config(args.config)
    rank = cfg["workload"]["rank"]
    cand, base = build_accelerator(cfg, "candidate"), build_accelerator(cfg, "baseline")
    print(f"{'workload':<16} {'nnz':>8} {'speedup':>8} {'savings':>8} {'O bottleneck':>13} {'E bottleneck':>13} {'secs':>6}")
    for name in args.workloads:
        start = time.perf_counter()
        tensor = generate_synthetic(BUNDLED[name])
        comp = compare(simulate_all_modes(tensor, cand, rank), simulate_all_modes(tensor, base, rank))
        write_reports(Path(args.out) / name, [comp.candidate, comp.baseline], comp)
        o_neck = "/".join(sorted({m.bottleneck for m in comp.candidate.modes}))
        e_neck = "/".join(sorted({m.bottleneck for m in comp.baseline.modes}))
        print(
            f"{name:<16} {tensor.nnz:>8} {comp.speedup:>8.3f} {comp.energy_savings:>8.3f} "
            f"{o_neck:>13} {e_neck:>13} {time.perf_counter() - start:>6.1f}"
        )


if __name__ == "__main__":
    main()
