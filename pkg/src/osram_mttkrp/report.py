"""Report emission: canonical JSON, flat CSV and a plain-text summary."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Sequence, Union

from .simulator import Comparison, RunReport, energy_total

CSV_HEADER = [
    "tensor", "mode", "tech", "cycles", "seconds", "energy_pj",
    "speedup", "energy_savings", "hits", "misses", "bytes_dram",
]

Reportable = Union[RunReport, Comparison]


def _mode_row(report: RunReport, m) -> list:
    return [
        report.tensor, m.mode, report.tech, m.mode_cycles, repr(m.mode_cycles / report.f_electrical),
        repr(m.energy.total), "", "", m.hits, m.misses, m.bytes_dram,
    ]


def emit_csv(items: Sequence[Reportable]) -> str:
    """One row per (tensor, mode, tech); comparisons add a ratio row per mode.

    Ratio rows carry only ``speedup`` and ``energy_savings``, with the tech
    column set to ``<candidate>/<baseline>``.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for item in items:
        if isinstance(item, Comparison):
            cand, base = item.candidate, item.baseline
            label = f"{cand.tech}/{base.tech}"
            for a, b, r in zip(cand.modes, base.modes, item.modes):
                writer.writerow(_mode_row(cand, a))
                writer.writerow(_mode_row(base, b))
                writer.writerow([cand.tensor, r.mode, label, "", "", "", repr(r.speedup), repr(r.energy_savings), "", "", ""])
        else:
            for m in item.modes:
                writer.writerow(_mode_row(item, m))
    return buf.getvalue()


def comparison_json(comp: Comparison) -> str:
    return json.dumps(comp.to_dict(), sort_keys=True, indent=2) + "\n"


def energy_closure_error(report: RunReport) -> float:
    """Largest relative gap between each mode's reported energy and its recomputed total."""
    worst = 0.0
    for m in report.modes:
        recomputed = energy_total(*m.energy_terms())
        reported = m.energy.total
        worst = max(worst, abs(recomputed - reported) / max(abs(reported), 1e-300))
    return worst


def summary_text(reports: Sequence[RunReport], comparison: Comparison | None = None, notes: Sequence[str] = ()) -> str:
    lines = []
    for r in reports:
        lines.append(f"{r.tensor} on {r.tech} (config {r.config_digest})")
        lines.append(f"  {'mode':>4} {'cycles':>12} {'bottleneck':>10} {'hit rate':>8} {'energy uJ':>11}")
        for m in r.modes:
            rate = m.hits / m.accesses if m.accesses else float("nan")
            lines.append(
                f"  {m.mode:>4} {m.mode_cycles:>12} {m.bottleneck:>10} {rate:>8.3f} {m.energy.total / 1e6:>11.3f}"
            )
        lines.append(
            f"  total {r.total_cycles} cycles = {r.total_seconds * 1e3:.4f} ms, "
            f"{r.total_energy / 1e6:.3f} uJ, area {r.area_mm2:.1f} mm^2"
        )
    if comparison is not None:
        lines.append(f"{comparison.candidate.tech} vs {comparison.baseline.tech}:")
        for r in comparison.modes:
            lines.append(f"  mode {r.mode}: speedup {r.speedup:.3f}x, energy savings {r.energy_savings:.3f}x")
        lines.append(f"  total: speedup {comparison.speedup:.3f}x, energy savings {comparison.energy_savings:.3f}x")
    lines.extend(notes)
    return "\n".join(lines) + "\n"


def write_reports(
    out_dir: str | Path,
    reports: Sequence[RunReport],
    comparison: Comparison | None = None,
    notes: Sequence[str] = (),
) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for r in reports:
        p = out / f"report_{r.tech}.json"
        p.write_text(r.to_json())
        written.append(p)
    if comparison is not None:
        p = out / "comparison.json"
        p.write_text(comparison_json(comparison))
        written.append(p)
    # single-tech runs use the same CSV layout, just without ratio rows
    csv_path = out / "comparison.csv"
    csv_path.write_text(emit_csv([comparison] if comparison is not None else list(reports)))
    written.append(csv_path)
    p = out / "summary.txt"
    p.write_text(summary_text(reports, comparison, notes))
    written.append(p)
    return written
