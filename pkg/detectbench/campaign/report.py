"""
Report files: JSON, per-figure CSV tables and a markdown trade-off table.
"""

import csv
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..errors import ConfigError
from ..metrics.classification import OUTCOME_ORDER, OutcomeClass
from .models import CampaignReport, SchemeReport

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv", "markdown")


def fmt(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.6f}"


def _mean(values: Iterable[float]) -> float:
    return float(np.mean(list(values)))


class TradeoffRow(BaseModel):
    """One line of the trade-off table, averaged over benchmarks."""
    model_config = ConfigDict(frozen=True)

    scheme: str
    knob: str = ""
    value: Optional[int] = None
    transient_detection: float
    permanent_detection: Optional[float] = None
    failures: float
    mean_latency: Optional[float] = None
    median_slack: Optional[float] = None
    slowdown: float
    area_overhead: float
    power_overhead: float


def tradeoff_rows(report: CampaignReport, knob: str = "", value: Optional[int] = None) -> List[TradeoffRow]:
    """Average every scheme's metrics over the report's benchmarks."""
    rows = []
    labels = list(dict.fromkeys(r.scheme for r in report.schemes))
    for label in labels:
        group = [r for r in report.schemes if r.scheme == label]
        transient = [r.efficiency["transient"] for r in group if "transient" in r.efficiency]
        permanent = [r.efficiency["permanent"] for r in group if "permanent" in r.efficiency]
        everything = [r.efficiency["all"] for r in group]
        latencies = [r.latency.mean for r in group if r.latency is not None]
        slack = [r.slack_insns.median for r in group if r.slack_insns is not None]
        rows.append(TradeoffRow(
            scheme=label,
            knob=knob,
            value=value,
            transient_detection=_mean(b.fraction(OutcomeClass.DETECTED) for b in transient) if transient else 0.0,
            permanent_detection=_mean(b.fraction(OutcomeClass.DETECTED) for b in permanent) if permanent else None,
            failures=_mean(b.failures for b in everything),
            mean_latency=_mean(latencies) if latencies else None,
            median_slack=_mean(slack) if slack else None,
            slowdown=_mean(r.slowdown for r in group),
            area_overhead=group[0].area_overhead,
            power_overhead=_mean(r.power_overhead for r in group),
        ))
    return rows


def render_tradeoffs(rows: Sequence[TradeoffRow]) -> str:
    """Markdown table with one row per (scheme, knob value)."""
    with_knob = any(row.knob for row in rows)
    header = ["scheme"]
    if with_knob:
        header += [rows[0].knob]
    header += ["transient detection", "permanent detection", "failures", "mean latency (cycles)",
               "median slack (insns)", "slowdown", "area overhead", "power overhead"]
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for row in rows:
        cells = [row.scheme]
        if with_knob:
            cells.append("" if row.value is None else str(row.value))
        cells += [
            f"{row.transient_detection:.1%}",
            "" if row.permanent_detection is None else f"{row.permanent_detection:.1%}",
            f"{row.failures:.1%}",
            "" if row.mean_latency is None else f"{row.mean_latency:.1f}",
            "" if row.median_slack is None else f"{row.median_slack:.1f}",
            f"{row.slowdown:.3f}x",
            f"{row.area_overhead:.2%}",
            f"{row.power_overhead:.1%}",
        ]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def _write_csv(path: Path, header: List[str], rows: Iterable[List]) -> Path:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _efficiency_rows(reports: List[SchemeReport], kind: str):
    for r in reports:
        breakdown = r.efficiency.get(kind)
        if breakdown is None:
            continue
        yield ([r.benchmark, r.scheme, breakdown.n]
               + [fmt(breakdown.fraction(cls)) for cls in OUTCOME_ORDER]
               + [fmt(breakdown.margin)])


def _histogram_rows(reports: List[SchemeReport], attr: str):
    for r in reports:
        summary = getattr(r, attr)
        if summary is None:
            continue
        for b in summary.histogram:
            yield [r.benchmark, r.scheme, b.lower, b.upper, b.count]


def write_csv_tables(report: CampaignReport, out_dir: Path) -> List[Path]:
    reports = report.schemes
    classes = [cls.value for cls in OUTCOME_ORDER]
    written = [
        _write_csv(out_dir / "efficiency_transient.csv", ["benchmark", "scheme", "n", *classes, "margin"],
                   _efficiency_rows(reports, "transient")),
        _write_csv(out_dir / "efficiency_permanent.csv", ["benchmark", "scheme", "n", *classes, "margin"],
                   _efficiency_rows(reports, "permanent")),
        _write_csv(out_dir / "latency_hist.csv", ["benchmark", "scheme", "lower", "upper", "count"],
                   _histogram_rows(reports, "latency")),
        _write_csv(out_dir / "slack_hist.csv", ["benchmark", "scheme", "lower", "upper", "count"],
                   _histogram_rows(reports, "slack_insns")),
        _write_csv(out_dir / "ipc.csv", ["benchmark", "scheme", "cycles", "commits", "ipc", "slowdown"],
                   ([r.benchmark, r.scheme, r.cycles, r.commits, fmt(r.ipc), fmt(r.slowdown)] for r in reports)),
    ]

    areas = {}
    for r in reports:
        areas.setdefault(r.scheme, r.area_overhead)
    written.append(_write_csv(out_dir / "area.csv", ["scheme", "area_overhead"],
                              ([scheme, fmt(area)] for scheme, area in areas.items())))
    # power_overhead is average power over the unprotected run; energy_overhead is the energy ratio
    written.append(_write_csv(out_dir / "power.csv", ["benchmark", "scheme", "power_overhead", "energy_overhead"],
                              ([r.benchmark, r.scheme, fmt(r.power_overhead), fmt(r.energy_overhead)]
                               for r in reports)))

    checkers = [r for r in reports if r.checker_stats is not None]
    if checkers:
        written.append(_write_csv(
            out_dir / "checkers.csv",
            ["benchmark", "scheme", "segments", "peak_concurrency", "busy_cycles",
             "all_busy_stall_cycles", "checkpoint_stall_cycles"],
            ([r.benchmark, r.scheme, r.checker_stats.segments, r.checker_stats.peak_concurrency,
              " ".join(str(c) for c in r.checker_stats.busy_cycles),
              r.checker_stats.all_busy_stall_cycles, r.checker_stats.checkpoint_stall_cycles]
             for r in checkers),
        ))
    return written


def emit_report(report: CampaignReport, formats: Sequence[str], out_dir: Path) -> List[Path]:
    """
    Write a campaign report in the requested formats.

    Args:
        report: Completed campaign report
        formats: Any of ``json``, ``csv``, ``markdown``
        out_dir: Directory to write into; created if missing

    Returns:
        Paths written
    """
    unknown = [f for f in formats if f not in FORMATS]
    if unknown:
        raise ConfigError(f"unknown report formats: {unknown}")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        if "json" in formats:
            path = out_dir / "report.json"
            path.write_text(report.model_dump_json(indent=2) + "\n")
            written.append(path)
        if "csv" in formats:
            written.extend(write_csv_tables(report, out_dir))
        if "markdown" in formats:
            path = out_dir / "tradeoffs.md"
            path.write_text("# Trade-offs\n\n" + render_tradeoffs(tradeoff_rows(report)))
            written.append(path)
    except OSError as e:
        raise ConfigError(f"cannot write report to {out_dir}: {e}") from None
    logger.info(f"Wrote {len(written)} report files to {out_dir}")
    return written
