"""Command-line driver.

Subcommands: ``simulate`` (one technology), ``compare`` (candidate against
baseline), ``analyze`` (closed-form counts only) and ``validate``.

Exit codes: 0 success, 1 usage or config error, 2 input data error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import time
from pathlib import Path
from typing import Sequence

from .config import CONFIG_ENV_VAR, ConfigInvalid, build_accelerator, load_config, with_overrides
from .hypergraph import build_hypergraph, compute_count, sort_for_mode, traffic_count
from .report import write_reports
from .simulator import SimulationError, compare, simulate_all_modes
from .tensor_io import CapacityError, SparseTensorCOO, SyntheticSpec, TensorParseError, generate_synthetic, load_frostt
from .uarch import ConfigError, FactorLayout
from .workloads import BUNDLED

log = logging.getLogger("osram_mttkrp")

EXIT_OK, EXIT_CONFIG, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InputDataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def load_workload(cfg: dict) -> SparseTensorCOO:
    work = cfg["workload"]
    if work["tensor"] is not None:
        path = Path(work["tensor"])
        try:
            return load_frostt(path)
        except FileNotFoundError:
            raise InputDataError(f"tensor file not found: {path}") from None
        except (TensorParseError, ValueError) as exc:
            raise InputDataError(f"{path}: {exc}") from None
    syn = work["synthetic"]
    if syn is None:
        raise UsageError("no workload: pass --tensor or --synthetic, or set workload.tensor/synthetic in the config")
    spec = BUNDLED[syn] if isinstance(syn, str) else SyntheticSpec(tuple(syn["dims"]), syn["nnz"], tuple(syn["skew"]), syn["seed"], syn["name"])
    if work["seed"] is not None:
        spec = dataclasses.replace(spec, seed=work["seed"])
    try:
        return generate_synthetic(spec)
    except CapacityError as exc:
        raise InputDataError(str(exc)) from None


def _parse_source(tensor: str | None, synthetic: str | None) -> dict:
    if tensor is not None and synthetic is not None:
        raise UsageError("--tensor and --synthetic are mutually exclusive")
    if synthetic is not None and synthetic.lstrip().startswith("{"):
        try:
            synthetic = json.loads(synthetic)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--synthetic is not valid JSON: {exc}") from None
    return {"tensor": tensor, "synthetic": synthetic}


def _sort_seconds(tensor: SparseTensorCOO) -> float:
    # host-side preprocessing, kept out of modeled runtime
    start = time.perf_counter()
    for m in range(tensor.num_modes):
        sort_for_mode(tensor, m)
    return time.perf_counter() - start


def run_experiment(
    config_path: str | Path | None,
    tensor_source: str | None = None,
    output_dir: str | Path = "out",
    *,
    synthetic: str | dict | None = None,
    mode: str = "compare",
    tech: str = "candidate",
    seed: int | None = None,
    rank: int | None = None,
    trace_path: str | Path | None = None,
) -> int:
    """Run ``compare`` or ``simulate`` and write reports; returns an exit code."""
    try:
        cfg = load_config(config_path)
        if isinstance(synthetic, dict):
            synthetic = json.dumps(synthetic)
        source = _parse_source(tensor_source, synthetic)
        cfg = with_overrides(cfg, seed=seed, rank=rank, **source)
        tensor = load_workload(cfg)
        r = cfg["workload"]["rank"]
        notes = [f"host preprocessing (per-mode sort): {_sort_seconds(tensor):.3f} s, excluded from modeled runtime"]
        if mode == "compare":
            cand = simulate_all_modes(tensor, build_accelerator(cfg, "candidate"), r)
            base = simulate_all_modes(tensor, build_accelerator(cfg, "baseline"), r)
            comp = compare(cand, base)
            files = write_reports(output_dir, [cand, base], comp, notes)
        else:
            acc = build_accelerator(cfg, tech)
            if trace_path is not None:
                report = _simulate_with_trace(tensor, acc, r, trace_path)
            else:
                report = simulate_all_modes(tensor, acc, r)
            files = write_reports(output_dir, [report], None, notes)
    except (ConfigInvalid, ConfigError) as exc:
        for err in getattr(exc, "errors", [str(exc)]):
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"input error: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_INPUT
    except InputDataError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SimulationError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    for f in files:
        log.info("wrote %s", f)
    print((Path(output_dir) / "summary.txt").read_text(), end="")
    return EXIT_OK


def _simulate_with_trace(tensor, acc, rank, trace_path):
    from .memtech import area_report
    from .simulator import RunReport, simulate_mode

    layout = FactorLayout(tensor.dims, rank, acc.element_bytes, acc.cache.line_bytes)
    with open(trace_path, "w") as fh:
        modes = tuple(simulate_mode(tensor, layout, m, acc, trace=fh) for m in range(tensor.num_modes))
    return RunReport(
        tensor.name, acc.tech.name, acc.digest(), acc.pe.f_electrical,
        area_report(acc.onchip_budget_bits, acc.tech, acc.pe_area).total, modes,
    )


def analyze(cfg: dict) -> dict:
    tensor = load_workload(cfg)
    rank = cfg["workload"]["rank"]
    elem = cfg["accelerator"]["element_bytes"]
    hg = build_hypergraph(tensor)
    modes = []
    for m in range(tensor.num_modes):
        elements = traffic_count(tensor.num_modes, tensor.nnz, rank, tensor.dims[m])
        modes.append({
            "mode": m,
            "out_rows": tensor.dims[m],
            "compute_ops": compute_count(tensor.num_modes, tensor.nnz, rank),
            "traffic_elements": elements,
            "traffic_bytes": elements * elem,
        })
    return {
        "tensor": tensor.name,
        "dims": list(tensor.dims),
        "nnz": tensor.nnz,
        "rank": rank,
        "vertices": hg.num_vertices,
        "hyperedges": hg.num_hyperedges,
        "modes": modes,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="osram-mttkrp", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, workload=True):
        p.add_argument("--config", default=os.environ.get(CONFIG_ENV_VAR),
                       help=f"config JSON (default: ${CONFIG_ENV_VAR}, else built-in defaults)")
        if workload:
            p.add_argument("--tensor", help="FROSTT .tns file")
            p.add_argument("--synthetic", help=f"bundled workload ({', '.join(BUNDLED)}) or inline JSON spec")
            p.add_argument("--seed", type=int, help="override the synthetic tensor's seed")
            p.add_argument("--rank", type=int, help="tensor rank R (default 16)")

    p = sub.add_parser("simulate", help="simulate one memory technology")
    common(p)
    p.add_argument("--out", default="out")
    p.add_argument("--tech", choices=("candidate", "baseline"), default="candidate")
    p.add_argument("--trace", help="write one line per cache lookup to this file")

    p = sub.add_parser("compare", help="candidate vs baseline technology")
    common(p)
    p.add_argument("--out", default="out")

    p = sub.add_parser("analyze", help="closed-form compute and traffic counts")
    common(p)
    p.add_argument("--out", help="also write analysis.json here")

    p = sub.add_parser("validate", help="check a config and print it fully populated")
    common(p, workload=False)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")

    if args.command in ("simulate", "compare"):
        return run_experiment(
            args.config, args.tensor, args.out, synthetic=args.synthetic, mode=args.command,
            tech=getattr(args, "tech", "candidate"), seed=args.seed, rank=args.rank,
            trace_path=getattr(args, "trace", None),
        )
    try:
        cfg = load_config(args.config)
        if args.command == "validate":
            print(json.dumps(cfg, indent=2, sort_keys=True))
            return EXIT_OK
        cfg = with_overrides(cfg, seed=args.seed, rank=args.rank, **_parse_source(args.tensor, args.synthetic))
        result = analyze(cfg)
    except ConfigInvalid as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"input error: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_INPUT
    except InputDataError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "analysis.json").write_text(text)
    print(text, end="")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
