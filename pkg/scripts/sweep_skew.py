"""Speedup and energy savings as index skew grows, on the NELL-2 shape.

Higher skew concentrates nonzeros on fewer factor rows. More lookups hit,
and hits are what the slower E-SRAM cache has to serve.

    python scripts/sweep_skew.py --skews 0 0.5 1 1.5 --nnz 100000
"""

import argparse

from osram_mttkrp.memtech import ESRAM_PAPER
from osram_mttkrp.simulator import AcceleratorConfig, compare, simulate_all_modes
from osram_mttkrp.tensor_io import generate_synthetic
from osram_mttkrp.uarch import CacheConfig
from osram_mttkrp.workloads import frostt_like


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--skews", type=float, nargs="+", default=[0.0, 0.5, 1.0, 1.2, 1.5])
    ap.add_argument("--nnz", type=int, default=100_000)
    ap.add_argument("--shape", default="nell-2")
    ap.add_argument("--service-blocks", type=int, default=1, help="0 aggregates every data-array block")
    args = ap.parse_args()

    cand = AcceleratorConfig(cache=CacheConfig(service_blocks=args.service_blocks or None))
    base = cand.with_tech(ESRAM_PAPER)
    print(f"{'skew':>5} {'hit rate':>8} {'speedup':>8} {'savings':>8}")
    for skew in args.skews:
        tensor = generate_synthetic(frostt_like(args.shape, args.nnz, skew))
        comp = compare(simulate_all_modes(tensor, cand), simulate_all_modes(tensor, base))
        hits = sum(m.hits for m in comp.candidate.modes)
        acc = sum(m.accesses for m in comp.candidate.modes)
        print(f"{skew:>5.2f} {hits / acc:>8.3f} {comp.speedup:>8.3f} {comp.energy_savings:>8.3f}")


if __name__ == "__main__":
    main()
