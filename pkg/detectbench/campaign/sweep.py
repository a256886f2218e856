"""
Configuration sweeps over one scheme knob.
"""

import csv
import logging
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import BaseModel, ConfigDict
from rich.console import Console

from ..errors import ConfigError
from ..schemes.configs import PardetConfig, RsmtConfig
from .engine import run_campaign
from .models import CampaignReport, ExperimentConfig
from .report import TradeoffRow, emit_report, fmt, render_tradeoffs, tradeoff_rows

logger = logging.getLogger(__name__)

# knob -> (scheme config type, field it sets)
KNOBS = {
    "rsmt_buffer": (RsmtConfig, "buffer_capacity"),
    "pardet_checkers": (PardetConfig, "n_checkers"),
}


class SweepPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: int
    report: CampaignReport


class SweepReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    knob: str
    points: List[SweepPoint]
    rows: List[TradeoffRow]


def apply_knob(config: ExperimentConfig, knob: str, value: int) -> ExperimentConfig:
    """
    Config with the knob set to ``value`` on the matching scheme, all else fixed.

    The ParDet per-checker log segment size is left alone, so total log
    capacity grows with the checker count.
    """
    if knob not in KNOBS:
        raise ConfigError(f"unknown sweep knob '{knob}' (expected one of {sorted(KNOBS)})")
    config_type, field = KNOBS[knob]
    if not any(isinstance(s, config_type) for s in config.schemes):
        raise ConfigError(f"knob '{knob}' needs a '{config_type().scheme}' scheme in the configuration")
    schemes = [
        s.model_copy(update={field: value}) if isinstance(s, config_type) else s
        for s in config.schemes
    ]
    return config.with_overrides(schemes=[s.model_dump() for s in schemes])


def run_sweep(
    config: ExperimentConfig,
    knob: str,
    values: Sequence[int],
    console: Optional[Console] = None,
) -> SweepReport:
    """
    One campaign per knob value.

    Args:
        config: Base experiment
        knob: ``rsmt_buffer`` or ``pardet_checkers``
        values: Knob values, in the order to report them
        console: Optional console for progress output

    Returns:
        SweepReport with one trade-off row per (swept scheme, value)
    """
    if not values:
        raise ConfigError("sweep needs at least one value")
    config_type, _ = KNOBS.get(knob, (None, None))
    points = []
    rows = []
    for value in values:
        swept = apply_knob(config, knob, value)
        logger.info(f"Sweep {knob}={value}")
        report = run_campaign(swept, console)
        points.append(SweepPoint(value=value, report=report))
        swept_labels = {s.label() for s in swept.schemes if isinstance(s, config_type)}
        rows.extend(row for row in tradeoff_rows(report, knob, value) if row.scheme in swept_labels)
    return SweepReport(knob=knob, points=points, rows=rows)


def write_sweep(sweep: SweepReport, out_dir: Path, formats: Sequence[str] = ("json", "csv", "markdown")) -> List[Path]:
    """Write the sweep table plus each point's full report under ``<knob>=<value>/``."""
    out_dir = Path(out_dir)
    written = []
    for point in sweep.points:
        written.extend(emit_report(point.report, formats, out_dir / f"{sweep.knob}={point.value}"))
    try:
        if "json" in formats:
            path = out_dir / "sweep.json"
            path.write_text(sweep.model_dump_json(indent=2, exclude={"points"}) + "\n")
            written.append(path)
        if "csv" in formats:
            path = out_dir / "sweep.csv"
            with open(path, "w", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(["scheme", sweep.knob, "transient_detection", "permanent_detection", "failures",
                                 "mean_latency", "median_slack", "slowdown", "area_overhead", "power_overhead"])
                for row in sweep.rows:
                    writer.writerow([row.scheme, row.value, fmt(row.transient_detection),
                                     fmt(row.permanent_detection), fmt(row.failures), fmt(row.mean_latency),
                                     fmt(row.median_slack), fmt(row.slowdown), fmt(row.area_overhead),
                                     fmt(row.power_overhead)])
            written.append(path)
        if "markdown" in formats:
            path = out_dir / "tradeoffs.md"
            path.write_text(f"# Trade-offs: {sweep.knob}\n\n" + render_tradeoffs(sweep.rows))
            written.append(path)
    except OSError as e:
        raise ConfigError(f"cannot write sweep report to {out_dir}: {e}") from None
    return written
