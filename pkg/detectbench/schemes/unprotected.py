"""
Unprotected single core: the reference design every overhead is relative to.
"""

from typing import Any, Dict, Optional

from ..core.isa import StepKind
from ..core.machine import FlatMemory
from ..injection.faults import FaultSpec
from .base_scheme import BaseScheme, CoreActivity, SchemeRunResult, SchemeStatus


class UnprotectedScheme(BaseScheme):
    """One core, no redundancy, faults go straight to the output."""

    name = "none"

    def describe(self) -> Dict[str, Any]:
        return {"scheme": "none"}

    def run(self, fault: Optional[FaultSpec] = None) -> SchemeRunResult:
        self.log_run_start(fault)
        core = self.make_core(fault)
        commits = 0

        while True:
            if core.cycle >= self.limits.max_cycles:
                status = SchemeStatus.TIMED_OUT
                break
            outcome = core.step()
            if outcome.kind is StepKind.CRASHED:
                status = SchemeStatus.CRASHED
                break
            if outcome.kind is StepKind.HALTED:
                status = SchemeStatus.HALTED
                break
            commits += 1
            if core.halted:
                status = SchemeStatus.HALTED
                break

        output = b""
        if status is SchemeStatus.HALTED and isinstance(core.memory, FlatMemory):
            output = core.memory.read_region(self.program.output_region)

        result = SchemeRunResult(
            scheme=self.name,
            status=status,
            cycles=core.cycle,
            commits=commits,
            output=output,
            crash_reason=core.crash_reason,
            verified_cycle=core.cycle,
            activity=[CoreActivity("core0", "main", core.cycle, commits)],
            fault=fault,
            manifest_cycle=self.manifest_cycle(core),
        )
        self.log_run_complete(result)
        return result
