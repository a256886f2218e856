"""
Campaign execution: golden runs, fault planning and parallel injection runs.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
import logging
import math
from pathlib import Path
from typing import List, Optional, Tuple

from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn

from ..config import GOLDEN_DIR
from ..core.assembler import assemble_file
from ..core.isa import MachineLimits, Program
from ..errors import GoldenRunError
from ..injection.faults import FaultSpec
from ..injection.planner import plan_campaign
from ..metrics.classification import (
    Outcome,
    OutcomeClass,
    aggregate_by_kind,
    classify,
    latency_stats,
)
from ..metrics.cost_model import area_overhead, energy_overhead, power_overhead
from ..schemes import create_scheme
from ..schemes.base_scheme import SchemeRunResult, SchemeStatus
from ..schemes.configs import DmrConfig, RsmtConfig, SchemeConfig, UnprotectedConfig
from ..schemes.rsmt import measure_slack
from .models import BenchmarkInfo, CampaignReport, EventRecord, ExperimentConfig, SchemeReport, SingleRunReport

logger = logging.getLogger(__name__)

# Chunks per worker; more chunks balance uneven run lengths
CHUNKS_PER_WORKER = 4


@dataclass(frozen=True)
class InjectionResult:
    """What a worker sends back for one faulty run."""
    outcome: Outcome
    status: SchemeStatus
    cycles: int
    max_slack_insns: int


def run_injections(
    program: Program,
    limits: MachineLimits,
    scheme_config: SchemeConfig,
    baseline: SchemeRunResult,
    faults: List[FaultSpec],
) -> List[InjectionResult]:
    """Run and classify one chunk of faults; the unit of work of a campaign worker."""
    scheme = create_scheme(scheme_config, program, limits)
    results = []
    for fault in faults:
        run = scheme.run(fault)
        outcome = classify(baseline, run, limits.hang_multiplier)
        max_slack = max((s.insns for s in run.slack), default=0)
        results.append(InjectionResult(outcome, run.status, run.cycles, max_slack))
    return results


def _run_injections_packed(args: Tuple) -> List[InjectionResult]:
    return run_injections(*args)


def golden_path(name: str, golden_dir: Path = GOLDEN_DIR) -> Path:
    return golden_dir / f"{name}.bin"


def golden_run(program: Program, limits: MachineLimits, check_fixture: bool = True) -> SchemeRunResult:
    """
    Fault-free unprotected reference run.

    Raises:
        GoldenRunError: the run does not halt, or differs from the stored fixture
    """
    result = create_scheme(UnprotectedConfig(), program, limits).run()
    if result.status is not SchemeStatus.HALTED:
        raise GoldenRunError(f"{program.name}: golden run {result.status.value} after {result.cycles} cycles"
                             + (f" ({result.crash_reason.value})" if result.crash_reason else ""))
    fixture = golden_path(program.name)
    if check_fixture and fixture.is_file():
        expected = fixture.read_bytes()
        if expected != result.output:
            raise GoldenRunError(f"{program.name}: output differs from golden fixture {fixture}")
    return result


class CampaignEngine:
    """Runs every configured scheme over every benchmark with a shared fault plan."""

    def __init__(self, config: ExperimentConfig, console: Optional[Console] = None):
        self.config = config
        self.console = console
        self.violations: List[str] = []

    def run(self) -> CampaignReport:
        benchmarks = []
        reports = []
        for path in self.config.resolve_benchmarks():
            info, scheme_reports = self.run_benchmark(path)
            benchmarks.append(info)
            reports.extend(scheme_reports)
        if self.violations:
            logger.warning(f"{len(self.violations)} invariant violations detected")
        return CampaignReport(
            config=self.config.report_dict(),
            benchmarks=benchmarks,
            schemes=reports,
            violations=list(self.violations),
        )

    def run_benchmark(self, path: Path) -> Tuple[BenchmarkInfo, List[SchemeReport]]:
        cfg = self.config
        limits = cfg.limits
        program = assemble_file(path, registers=limits.registers, memory_words=limits.memory_words)
        golden = golden_run(program, limits)
        logger.info(f"Golden run of {program.name}: {golden.cycles} cycles, {golden.commits} commits")

        plan = plan_campaign(
            cfg.n_faults,
            cfg.seed,
            golden.cycles,
            kind_mix=cfg.kind_mix,
            registers=limits.registers,
            inject_mean=cfg.inject_mean,
            inject_stddev=cfg.inject_stddev,
            benchmark=program.name,
            scheme_matrix=[s.model_dump() for s in cfg.schemes],
        )

        reports = [self.run_scheme(program, golden, scheme, plan.faults) for scheme in cfg.schemes]
        info = BenchmarkInfo(
            name=program.name,
            golden_cycles=golden.cycles,
            golden_commits=golden.commits,
            output_words=program.output_region[1],
            seed=plan.seed,
            faults=plan.faults,
        )
        return info, reports

    def run_scheme(
        self,
        program: Program,
        golden: SchemeRunResult,
        scheme_config: SchemeConfig,
        faults: List[FaultSpec],
    ) -> SchemeReport:
        cfg = self.config
        label = scheme_config.label()
        baseline = create_scheme(scheme_config, program, cfg.limits).run()
        if baseline.status is not SchemeStatus.HALTED:
            raise GoldenRunError(f"{program.name}/{label}: fault-free run {baseline.status.value}")
        if baseline.output != golden.output:
            self._violation(f"{program.name}/{label}: fault-free output differs from golden output")

        # Faulty runs may go a little past the hang threshold, never further
        run_limits = cfg.limits.model_copy(
            update={"max_cycles": math.ceil(cfg.limits.hang_multiplier * baseline.cycles) + 1}
        )
        results = self._execute(program, run_limits, scheme_config, baseline, faults, label)
        outcomes = [r.outcome for r in results]
        self._check_invariants(program.name, scheme_config, results)

        detected = [o for o in outcomes if o.outcome is OutcomeClass.DETECTED]
        manifest = [o for o in detected if o.manifest_latency_cycles is not None]
        efficiency = aggregate_by_kind(outcomes)
        counts = efficiency["all"].counts
        logger.info(f"{program.name}/{label}: " + ", ".join(f"{k.value} {v}" for k, v in counts.items()))

        return SchemeReport(
            benchmark=program.name,
            scheme=label,
            config=scheme_config.model_dump(),
            efficiency=efficiency,
            latency=latency_stats(outcomes) if detected else None,
            manifest_latency=latency_stats(outcomes, manifest=True) if manifest else None,
            cycles=baseline.cycles,
            commits=baseline.commits,
            ipc=baseline.ipc,
            slowdown=baseline.cycles / golden.cycles,
            verified_cycle=baseline.verified_cycle,
            area_overhead=area_overhead(scheme_config),
            power_overhead=power_overhead(baseline, golden, cfg.power),
            energy_overhead=energy_overhead(baseline, golden, cfg.power),
            slack_insns=measure_slack(baseline.slack, "insns") if baseline.slack else None,
            slack_cycles=measure_slack(baseline.slack, "cycles") if baseline.slack else None,
            checker_stats=baseline.checker_stats,
            outcomes=outcomes,
        )

    def _execute(
        self,
        program: Program,
        limits: MachineLimits,
        scheme_config: SchemeConfig,
        baseline: SchemeRunResult,
        faults: List[FaultSpec],
        label: str,
    ) -> List[InjectionResult]:
        workers = self.config.workers
        size = max(1, math.ceil(len(faults) / (workers * CHUNKS_PER_WORKER)))
        chunks = [faults[i:i + size] for i in range(0, len(faults), size)]
        reference = replace(baseline, slack=[], activity=[], checker_stats=None)
        tasks = [(program, limits, scheme_config, reference, chunk) for chunk in chunks]

        results: List[InjectionResult] = []
        with self._progress() as progress:
            task = progress.add_task(f"  {program.name}/{label}", total=len(faults)) if progress else None
            if workers == 1:
                chunk_results = map(_run_injections_packed, tasks)
                for chunk in chunk_results:
                    results.extend(chunk)
                    if progress:
                        progress.update(task, advance=len(chunk))
            else:
                with ProcessPoolExecutor(max_workers=workers) as executor:
                    # map() yields in submission order, so the result order never depends on scheduling
                    for chunk in executor.map(_run_injections_packed, tasks):
                        results.extend(chunk)
                        if progress:
                            progress.update(task, advance=len(chunk))
        return results

    def _progress(self):
        if self.console is None:
            return _NoProgress()
        return Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TextColumn("[progress.percentage]{task.percentage:>3.0f}%"),
            console=self.console,
            transient=True,
        )

    def _check_invariants(self, benchmark: str, scheme_config: SchemeConfig, results: List[InjectionResult]):
        label = scheme_config.label()
        if isinstance(scheme_config, (DmrConfig, RsmtConfig)):
            sdc = [r.outcome.fault_id for r in results if r.outcome.outcome is OutcomeClass.SDC]
            if sdc:
                self._violation(f"{benchmark}/{label}: {len(sdc)} silent data corruptions (faults {sdc[:5]})")
        if isinstance(scheme_config, RsmtConfig):
            worst = max((r.max_slack_insns for r in results), default=0)
            if worst > scheme_config.buffer_capacity:
                self._violation(f"{benchmark}/{label}: slack {worst} exceeds buffer capacity "
                                f"{scheme_config.buffer_capacity}")

    def _violation(self, message: str):
        logger.error(f"Invariant violation: {message}")
        self.violations.append(message)


class _NoProgress:
    def __enter__(self):
        return None

    def __exit__(self, *exc):
        return False


def run_campaign(config: ExperimentConfig, console: Optional[Console] = None) -> CampaignReport:
    """Execute a campaign and return its report."""
    return CampaignEngine(config, console).run()


def run_single(
    program: Program,
    scheme_config: SchemeConfig,
    limits: MachineLimits,
    fault: Optional[FaultSpec] = None,
) -> SingleRunReport:
    """
    Run one benchmark under one scheme and classify it if faulted.

    Slowdown is relative to the unprotected golden run; the outcome is
    classified against the scheme's own fault-free run.
    """
    golden = golden_run(program, limits)
    scheme = create_scheme(scheme_config, program, limits)
    baseline = scheme.run()
    run, outcome = baseline, None
    if fault is not None:
        run_limits = limits.model_copy(update={"max_cycles": math.ceil(limits.hang_multiplier * baseline.cycles) + 1})
        run = create_scheme(scheme_config, program, run_limits).run(fault)
        outcome = classify(baseline, run, limits.hang_multiplier)
    return SingleRunReport(
        benchmark=program.name,
        scheme=scheme_config.label(),
        config=scheme_config.model_dump(),
        fault=fault.label() if fault is not None else None,
        status=run.status.value,
        cycles=run.cycles,
        commits=run.commits,
        ipc=run.ipc,
        slowdown=baseline.cycles / golden.cycles if golden.cycles else 1.0,
        verified_cycle=run.verified_cycle,
        crash_reason=run.crash_reason.value if run.crash_reason else None,
        events=[EventRecord(cycle=e.cycle, seq=e.seq, cause=e.cause.value, detail=e.detail) for e in run.events],
        outcome=outcome,
    )
