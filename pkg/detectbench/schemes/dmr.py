"""
Spatial dual modular redundancy.

Two identical cores run the same program in strict lockstep, each with its
own copy of the input image. Only the main core carries the fault; every
cycle the two commit records are compared and the first difference stops
the run.
"""

import logging
from typing import Any, Dict, Optional

from ..core.isa import MachineLimits, Program, StepKind
from ..injection.faults import FaultSpec
from .base_scheme import (
    BaseScheme,
    CoreActivity,
    DetectionCause,
    DetectionEvent,
    SchemeRunResult,
    SchemeStatus,
    compare_commits,
)

logger = logging.getLogger(__name__)


class DmrScheme(BaseScheme):
    """Lockstep main/shadow core pair."""

    name = "dmr"

    def describe(self) -> Dict[str, Any]:
        return {"scheme": "dmr"}

    def run(self, fault: Optional[FaultSpec] = None) -> SchemeRunResult:
        self.log_run_start(fault)
        main = self.make_core(fault)
        shadow = self.make_core()
        events = []
        commits = 0
        cycle = 0

        while True:
            if cycle >= self.limits.max_cycles:
                status = SchemeStatus.TIMED_OUT
                break

            a = main.step(cycle + 1)
            if a.kind is StepKind.CRASHED:
                cycle = main.cycle
                status = SchemeStatus.CRASHED
                break
            b = shadow.step(cycle + 1)

            if a.kind is StepKind.HALTED and b.kind is StepKind.HALTED:
                status = SchemeStatus.HALTED
                break

            cycle += 1
            if a.kind is StepKind.COMMITTED and b.kind is StepKind.COMMITTED:
                commits += 1
                mismatch = compare_commits(a.record, b.record)
                if mismatch is not None:
                    events.append(DetectionEvent(cycle, a.record.seq, DetectionCause.RESULT_MISMATCH,
                                                 mismatch.describe()))
                    logger.debug(f"Lockstep mismatch at cycle {cycle}: {mismatch.describe()}")
                    status = SchemeStatus.DETECTED
                    break
                if main.halted and shadow.halted:
                    status = SchemeStatus.HALTED
                    break
            else:
                # One core retired while the other halted or crashed
                detail = f"main {a.kind.value}, shadow {b.kind.value}"
                events.append(DetectionEvent(cycle, main.seq, DetectionCause.RESULT_MISMATCH, detail))
                status = SchemeStatus.DETECTED
                break

        output = b""
        if status is SchemeStatus.HALTED:
            output = main.memory.read_region(self.program.output_region)

        result = SchemeRunResult(
            scheme=self.name,
            status=status,
            cycles=cycle,
            commits=commits,
            output=output,
            events=events,
            crash_reason=main.crash_reason,
            verified_cycle=cycle,
            activity=[
                CoreActivity("main", "main", cycle, main.seq),
                CoreActivity("shadow", "main", cycle, shadow.seq),
            ],
            fault=fault,
            manifest_cycle=self.manifest_cycle(main),
        )
        self.log_run_complete(result)
        return result


def run_dmr(program: Program, limits: MachineLimits, fault: Optional[FaultSpec] = None) -> SchemeRunResult:
    """Run ``program`` on a lockstep core pair."""
    return DmrScheme(program, limits).run(fault)

