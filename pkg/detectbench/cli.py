"""
Command-line interface for detectbench.
"""

import logging
import sys
from pathlib import Path

import click
from pydantic import TypeAdapter, ValidationError
from rich.console import Console
from rich.table import Table

from .campaign.engine import golden_path, golden_run, run_campaign, run_single
from .campaign.models import (
    BUNDLED_BENCHMARKS,
    CampaignReport,
    ExperimentConfig,
    apply_env_overrides,
    resolve_benchmark,
)
from .campaign.report import FORMATS, emit_report
from .campaign.sweep import KNOBS, run_sweep, write_sweep
from .config import (
    EXIT_CONFIG_ERROR,
    EXIT_GOLDEN_FAILURE,
    EXIT_INVARIANT_VIOLATION,
    GOLDEN_DIR,
    LOG_FORMAT,
    LOG_LEVEL,
)
from .core.assembler import assemble_file, render_listing
from .core.isa import MachineLimits
from .errors import ConfigError, DetectBenchError, GoldenRunError, InvariantViolation
from .injection.faults import parse_fault
from .metrics.classification import OUTCOME_ORDER
from .schemes.configs import SchemeConfig

# Setup logging
logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)
logger = logging.getLogger(__name__)

# Rich console for pretty output
console = Console()


def exit_code_for(error: Exception) -> int:
    """Exit code a failed command returns."""
    if isinstance(error, GoldenRunError):
        return EXIT_GOLDEN_FAILURE
    if isinstance(error, InvariantViolation):
        return EXIT_INVARIANT_VIOLATION
    return EXIT_CONFIG_ERROR


def fail(error: Exception, what: str):
    console.print(f"[bold red]✗ Error:[/bold red] {error}")
    if isinstance(error, DetectBenchError):
        logger.debug(f"{what}: {error}")
    else:
        logger.exception(what)
    sys.exit(exit_code_for(error))


def parse_formats(formats) -> list:
    selected = [f.strip() for item in formats for f in item.split(",") if f.strip()]
    return selected or list(FORMATS)


def scheme_from_options(scheme: str, buffer: int, checkers: int) -> SchemeConfig:
    block = {"scheme": scheme}
    if scheme == "rsmt" and buffer is not None:
        block["buffer_capacity"] = buffer
    if scheme == "pardet" and checkers is not None:
        block["n_checkers"] = checkers
    try:
        return TypeAdapter(SchemeConfig).validate_python(block)
    except ValidationError as e:
        raise ConfigError(f"invalid scheme options: {e}") from None


def load_experiment(config_path, seed, workers, out) -> ExperimentConfig:
    if config_path:
        config = ExperimentConfig.from_file(config_path)
    else:
        config = ExperimentConfig.from_dict(apply_env_overrides({}))
    return config.with_overrides(seed=seed, workers=workers, output_dir=out)


@click.group()
def cli():
    """detectbench: fault-injection harness for DMR, R-SMT and ParDet."""
    pass


@cli.command()
@click.argument('source', type=click.Path(exists=True, dir_okay=False))
def asm(source):
    """Assemble a program and print its listing."""
    try:
        program = assemble_file(Path(source))
        for line in render_listing(program):
            console.print(line, highlight=False)
        start, length = program.output_region
        console.print(f"[dim]{len(program)} instructions, {len(program.data_init)} data words, "
                      f"output [{start}, {start + length})[/dim]")
    except Exception as e:
        fail(e, "Failed to assemble program")


@cli.command()
@click.argument('benchmark')
@click.option('--scheme', type=click.Choice(['none', 'dmr', 'rsmt', 'pardet']), default='dmr', show_default=True)
@click.option('--buffer', type=int, help='R-SMT comparison buffer capacity')
@click.option('--checkers', type=int, help='ParDet checker core count')
@click.option('--fault', 'fault_text', type=str, help='Fault to inject, e.g. transient:r5:3:100')
@click.option('--format', 'fmt', type=click.Choice(['text', 'json']), default='text', show_default=True)
@click.option('--out', type=click.Path(dir_okay=False), help='Also write the JSON report to this file')
def run(benchmark, scheme, buffer, checkers, fault_text, fmt, out):
    """Run one benchmark under one scheme."""
    try:
        limits = MachineLimits()
        program = assemble_file(resolve_benchmark(benchmark), registers=limits.registers,
                                memory_words=limits.memory_words)
        scheme_config = scheme_from_options(scheme, buffer, checkers)
        fault = parse_fault(fault_text) if fault_text else None
        report = run_single(program, scheme_config, limits, fault)
        text = report.model_dump_json(indent=2)

        if out:
            Path(out).write_text(text + "\n")
        if fmt == 'json':
            click.echo(text)
            return

        console.print(f"[bold blue]{report.benchmark}[/bold blue] under [cyan]{report.scheme}[/cyan]"
                      + (f" with fault [yellow]{report.fault}[/yellow]" if report.fault else ""))
        console.print(f"  Status: {report.status}" + (f" ({report.crash_reason})" if report.crash_reason else ""))
        console.print(f"  Cycles: {report.cycles}  Commits: {report.commits}  IPC: {report.ipc:.3f}")
        console.print(f"  Fault-free slowdown vs unprotected: {report.slowdown:.3f}x")
        for event in report.events:
            console.print(f"  [red]Detected[/red] at cycle {event.cycle} (seq {event.seq}, {event.cause}): "
                          f"{event.detail}", highlight=False)
        if report.outcome is not None:
            latency = report.outcome.latency_cycles
            console.print(f"  Outcome: [bold]{report.outcome.outcome.value}[/bold]"
                          + (f", latency {latency} cycles" if latency is not None else ""))
    except Exception as e:
        fail(e, "Run failed")


@cli.command()
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), help='Experiment JSON file')
@click.option('--seed', type=int, help='Campaign seed')
@click.option('--workers', type=int, help='Parallel run workers')
@click.option('--out', type=click.Path(file_okay=False), help='Output directory')
@click.option('--format', 'formats', multiple=True, help='json, csv, markdown (default: all)')
def campaign(config_path, seed, workers, out, formats):
    """Run a statistical fault-injection campaign."""
    try:
        config = load_experiment(config_path, seed, workers, out)
        console.print(f"[bold blue]Campaign:[/bold blue] {len(config.benchmarks)} benchmarks x "
                      f"{len(config.schemes)} schemes x {config.n_faults} faults "
                      f"(seed {config.seed}, {config.workers} workers)")
        report = run_campaign(config, console)
        written = emit_report(report, parse_formats(formats), Path(config.output_dir))
        print_summary(report)
        console.print(f"[bold green]✓ Wrote {len(written)} files to:[/bold green] {config.output_dir}")
        if report.violations:
            for violation in report.violations:
                console.print(f"[bold red]✗ Invariant violation:[/bold red] {violation}")
            sys.exit(EXIT_INVARIANT_VIOLATION)
    except Exception as e:
        fail(e, "Campaign failed")


@cli.command()
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), help='Experiment JSON file')
@click.option('--knob', type=click.Choice(sorted(KNOBS)), required=True)
@click.option('--values', required=True, help='Comma-separated knob values, e.g. 2,5,10,50')
@click.option('--seed', type=int, help='Campaign seed')
@click.option('--workers', type=int, help='Parallel run workers')
@click.option('--out', type=click.Path(file_okay=False), help='Output directory')
@click.option('--format', 'formats', multiple=True, help='json, csv, markdown (default: all)')
def sweep(config_path, knob, values, seed, workers, out, formats):
    """Run one campaign per value of a scheme knob."""
    try:
        try:
            parsed = [int(v) for v in values.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"--values must be comma-separated integers, got '{values}'") from None
        config = load_experiment(config_path, seed, workers, out)
        result = run_sweep(config, knob, parsed, console)
        written = write_sweep(result, Path(config.output_dir), parse_formats(formats))

        table = Table(title=f"Sweep over {knob}")
        table.add_column("Scheme", style="cyan")
        table.add_column(knob, style="dim")
        table.add_column("Detection (T)", style="green")
        table.add_column("Slowdown", style="yellow")
        table.add_column("Median slack", style="blue")
        for row in result.rows:
            table.add_row(row.scheme, str(row.value), f"{row.transient_detection:.1%}", f"{row.slowdown:.3f}x",
                          "" if row.median_slack is None else f"{row.median_slack:.1f}")
        console.print(table)
        if knob == "rsmt_buffer" and len(result.rows) > 1 and len({row.slowdown for row in result.rows}) == 1:
            console.print("[dim]Slowdown is the same at every capacity: the buffer never fills under this issue policy "
                          "(try \"policy\": \"primary_first\")[/dim]")
        console.print(f"[bold green]✓ Wrote {len(written)} files to:[/bold green] {config.output_dir}")

        violations = [v for point in result.points for v in point.report.violations]
        if violations:
            for violation in violations:
                console.print(f"[bold red]✗ Invariant violation:[/bold red] {violation}")
            sys.exit(EXIT_INVARIANT_VIOLATION)
    except Exception as e:
        fail(e, "Sweep failed")


@cli.command()
@click.argument('report_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--out', type=click.Path(file_okay=False), help='Output directory (default: next to the report)')
@click.option('--format', 'formats', multiple=True, help='json, csv, markdown (default: all)')
def report(report_path, out, formats):
    """Re-emit a stored report.json in other formats."""
    try:
        stored = CampaignReport.load(report_path)
        out_dir = Path(out) if out else Path(report_path).parent
        written = emit_report(stored, parse_formats(formats), out_dir)
        print_summary(stored)
        console.print(f"[bold green]✓ Wrote {len(written)} files to:[/bold green] {out_dir}")
    except Exception as e:
        fail(e, "Report failed")


@cli.command()
@click.argument('benchmarks', nargs=-1)
@click.option('--out', type=click.Path(file_okay=False), help=f'Fixture directory (default: {GOLDEN_DIR})')
def golden(benchmarks, out):
    """Write golden output fixtures for benchmarks (default: all bundled)."""
    try:
        out_dir = Path(out) if out else GOLDEN_DIR
        out_dir.mkdir(parents=True, exist_ok=True)
        limits = MachineLimits()
        for name in benchmarks or BUNDLED_BENCHMARKS:
            program = assemble_file(resolve_benchmark(name), registers=limits.registers,
                                    memory_words=limits.memory_words)
            result = golden_run(program, limits, check_fixture=False)
            path = golden_path(program.name, out_dir)
            path.write_bytes(result.output)
            console.print(f"[bold green]✓[/bold green] {program.name}: {result.cycles} cycles, "
                          f"{len(result.output) // 8} output words -> {path}")
    except Exception as e:
        fail(e, "Failed to write golden fixtures")


def print_summary(report: CampaignReport):
    """Per-scheme detection rates with confidence margins."""
    table = Table(title="Detection efficiency (all faults)")
    table.add_column("Benchmark", style="cyan")
    table.add_column("Scheme", style="green")
    for cls in OUTCOME_ORDER:
        table.add_column(cls.value.capitalize(), justify="right")
    table.add_column("±", style="dim", justify="right")
    table.add_column("Slowdown", style="yellow", justify="right")
    for r in report.schemes:
        breakdown = r.efficiency["all"]
        table.add_row(r.benchmark, r.scheme, *[f"{breakdown.fraction(cls):.1%}" for cls in OUTCOME_ORDER],
                      f"{breakdown.margin:.1%}", f"{r.slowdown:.3f}x")
    console.print(table)


def main():
    cli()


if __name__ == '__main__':
    main()
