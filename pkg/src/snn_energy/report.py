"""CSV rows and text tables for energy reports."""

from __future__ import annotations

import csv
import io
from typing import Iterable, Optional, Sequence

from .energy import EnergyBreakdown, EnergyReport, LayerEnergy
from .study import SweepResult

CSV_COLUMNS = ("layer", "mode", "category", "count", "mem_bytes", "energy_nj")
ROW_ORDER = ("potentials", "weights", "bias", "in_out", "synaptic_ops", "addressing", "total")


def fmt(value: Optional[float]) -> str:
    """Scientific notation with 6 significant digits; ``None`` is an empty cell."""
    if value is None:
        return ""
    return f"{value:.5e}"


def _category_rows(label: str, mode: str, counts: dict, sizes: dict, energy: EnergyBreakdown) -> list[list[str]]:
    values = {
        "potentials": energy.mem_pot, "weights": energy.mem_weights, "bias": energy.mem_bias,
        "in_out": energy.mem_io, "synaptic_ops": energy.ops, "addressing": energy.addressing,
        "total": energy.total,
    }
    return [[label, mode, cat, fmt(counts.get(cat)), fmt(sizes.get(cat)), fmt(values[cat])] for cat in ROW_ORDER]


def _layer_counts(le: LayerEnergy) -> tuple[dict, dict]:
    counts = {
        "potentials": le.mem.potentials,
        "weights": le.mem.rd_weights,
        "bias": le.mem.rd_bias,
        "in_out": le.mem.io,
        "synaptic_ops": le.ops.mac + le.ops.acc,
        "addressing": le.addr.mac + le.addr.acc,
    }
    sizes = {
        "potentials": le.sizing.pot_bytes,
        "weights": le.sizing.weights_bytes,
        "bias": le.sizing.bias_bytes,
        "in_out": le.sizing.in_bytes + le.sizing.out_bytes,
    }
    return counts, sizes


def report_rows(report: EnergyReport) -> list[list[str]]:
    """One row per (layer, category), then the aggregate rows labelled TOTAL."""
    mode = report.mode.value
    rows: list[list[str]] = []
    for le in report.layers:
        counts, sizes = _layer_counts(le)
        rows.extend(_category_rows(le.label, mode, counts, sizes, le.energy))
    mem, op, addr = report.mem, report.ops, report.addr
    totals = {
        "potentials": mem.potentials, "weights": mem.rd_weights, "bias": mem.rd_bias,
        "in_out": mem.io, "synaptic_ops": op.mac + op.acc, "addressing": addr.mac + addr.acc,
    }
    rows.extend(_category_rows("TOTAL", mode, totals, {}, report.aggregate))
    return rows


def write_csv(stream, reports: Iterable[EnergyReport]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for report in reports:
        writer.writerows(report_rows(report))


def csv_text(reports: Iterable[EnergyReport]) -> str:
    buf = io.StringIO()
    write_csv(buf, reports)
    return buf.getvalue()


def sweep_csv_text(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("kind", result.parameter, "e_snn_nj", "e_fnn_nj", "ratio"))
    for p in result.points:
        writer.writerow(("point", fmt(p.value), fmt(p.e_snn), fmt(p.e_fnn), fmt(p.ratio)))
    if result.crossover is not None:
        writer.writerow(("crossover", fmt(result.crossover), "", "", fmt(1.0)))
    return buf.getvalue()


_TABLE_LINES = (
    ("Memory  Potentials", "mem_pot"),
    ("        Weights", "mem_weights"),
    ("        Bias", "mem_bias"),
    ("        In/Out", "mem_io"),
    ("        Total", "memory"),
    ("Synaptic Op.", "ops"),
    ("Addressing", "addressing"),
    ("Total (nJ)", "total"),
)


def _cell(breakdown: EnergyBreakdown, attr: str, is_fnn: bool) -> str:
    if attr == "mem_pot" and is_fnn:
        return "--"
    return f"{getattr(breakdown, attr):.3E}"


def format_table(reports: Sequence[EnergyReport], ratio: Optional[float] = None) -> str:
    """Aggregate breakdown by category, one column per report."""
    head = f"{'':<22}" + "".join(f"{r.mode.value.upper():>14}" for r in reports)
    lines = [f"network: {reports[0].network}", head]
    for title, attr in _TABLE_LINES:
        cells = "".join(f"{_cell(r.aggregate, attr, r.mode.value == 'fnn'):>14}" for r in reports)
        lines.append(f"{title:<22}{cells}")
    if ratio is not None:
        lines.append(f"{'E_FNN / E_SNN':<22}{ratio:>14.2f}")
    for r in reports:
        if r.mode.value == "snn":
            lines.append(f"snn: T={r.timesteps} neuron={r.neuron.value} first_layer={r.options.first_layer}"
                         f"{' strict_paper' if r.options.strict_paper else ''}")
        if r.out_of_range_layers:
            lines.append(f"{r.mode.value}: memories outside the SRAM table ({r.policy.value}): "
                         + " ".join(r.out_of_range_layers))
    return "\n".join(lines)
