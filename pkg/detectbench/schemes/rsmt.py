"""
Redundant simultaneous multithreading.

A primary and a redundant hardware thread share one core and its commit
port. The primary pushes each commit record into a bounded comparison
buffer; the redundant thread pops the head when it retires the same
instruction and compares. A full buffer stalls the primary, an empty one
stalls the redundant thread.
"""

from collections import deque
from dataclasses import dataclass
import logging
from typing import Any, Deque, Dict, List, Optional

from ..config import RSMT_BUFFER_CAPACITY, RSMT_COMMIT_WIDTH, RSMT_POLICY
from ..core.isa import CommitRecord, MachineLimits, Program, StepKind
from ..core.machine import Core
from ..errors import CampaignError, ConfigError, InvariantViolation
from ..injection.faults import FaultSpec
from ..metrics.statistics import DistributionSummary, summarize
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

POLICIES = ("round_robin", "primary_first")


@dataclass(frozen=True)
class SlackSample:
    """Re-execution slack of one instruction, sampled at the redundant commit."""
    seq: int
    insns: int
    cycles: int


class ComparisonBuffer:
    """Bounded FIFO of primary-thread commit records."""

    def __init__(self, capacity: int = RSMT_BUFFER_CAPACITY):
        if capacity < 1:
            raise ConfigError(f"comparison buffer needs at least one entry, got {capacity}")
        self.capacity = capacity
        self.queue: Deque[CommitRecord] = deque()
        self.peak = 0

    def __len__(self) -> int:
        return len(self.queue)

    @property
    def full(self) -> bool:
        return len(self.queue) >= self.capacity

    @property
    def empty(self) -> bool:
        return not self.queue

    def push(self, record: CommitRecord) -> None:
        if self.full:
            raise InvariantViolation(f"push into a full comparison buffer (capacity {self.capacity})")
        self.queue.append(record)
        self.peak = max(self.peak, len(self.queue))

    def pop(self) -> CommitRecord:
        if not self.queue:
            raise InvariantViolation("pop from an empty comparison buffer")
        return self.queue.popleft()


class RsmtScheme(BaseScheme):
    """Primary and redundant threads interleaved on one commit port."""

    name = "rsmt"

    def __init__(
        self,
        program: Program,
        limits: MachineLimits,
        buffer_capacity: int = RSMT_BUFFER_CAPACITY,
        commit_width: int = RSMT_COMMIT_WIDTH,
        policy: str = RSMT_POLICY,
    ):
        super().__init__(program, limits)
        if buffer_capacity < 1:
            raise ConfigError(f"buffer_capacity must be >= 1, got {buffer_capacity}")
        if commit_width not in (1, 2):
            raise ConfigError(f"commit_width must be 1 or 2, got {commit_width}")
        if policy not in POLICIES:
            raise ConfigError(f"unknown arbitration policy '{policy}'")
        self.buffer_capacity = buffer_capacity
        self.commit_width = commit_width
        self.policy = policy

    def describe(self) -> Dict[str, Any]:
        return {
            "scheme": "rsmt",
            "buffer_capacity": self.buffer_capacity,
            "commit_width": self.commit_width,
            "policy": self.policy,
        }

    def _settle(self, thread: Core) -> None:
        # A thread whose pc ran off the end halts without using the commit port
        if not thread.finished and thread.pc == len(self.program):
            thread.step()

    def _grant(self, primary_ready: bool, redundant_ready: bool, last: str) -> List[str]:
        if self.commit_width == 2:
            return [t for t, ok in (("redundant", redundant_ready), ("primary", primary_ready)) if ok]
        if primary_ready and redundant_ready:
            if self.policy == "primary_first":
                return ["primary"]
            return ["redundant" if last == "primary" else "primary"]
        if primary_ready:
            return ["primary"]
        if redundant_ready:
            return ["redundant"]
        return []

    def run(self, fault: Optional[FaultSpec] = None) -> SchemeRunResult:
        self.log_run_start(fault)
        primary = self.make_core(fault)
        redundant = self.make_core()
        buffer = ComparisonBuffer(self.buffer_capacity)
        events: List[DetectionEvent] = []
        slack: List[SlackSample] = []
        primary_commits = redundant_commits = 0
        last_grant = "redundant"
        cycle = 0
        status: Optional[SchemeStatus] = None

        while status is None:
            self._settle(primary)
            self._settle(redundant)
            if primary.halted and redundant.halted:
                if buffer.empty:
                    status = SchemeStatus.HALTED
                else:
                    events.append(DetectionEvent(cycle, buffer.queue[0].seq, DetectionCause.RESULT_MISMATCH,
                                                 f"redundant thread halted with {len(buffer)} unchecked results"))
                    status = SchemeStatus.DETECTED
                break
            if cycle >= self.limits.max_cycles:
                status = SchemeStatus.TIMED_OUT
                break

            primary_ready = not primary.finished and not buffer.full
            redundant_ready = not redundant.finished and (not buffer.empty or primary.halted)
            grants = self._grant(primary_ready, redundant_ready, last_grant)
            if not grants:
                raise InvariantViolation(f"neither thread can commit at cycle {cycle + 1}")
            cycle += 1

            for thread in grants:
                last_grant = thread
                if thread == "primary":
                    outcome = primary.step(cycle)
                    if outcome.kind is StepKind.CRASHED:
                        status = SchemeStatus.CRASHED
                        break
                    if outcome.kind is StepKind.COMMITTED:
                        primary_commits += 1
                        buffer.push(outcome.record)
                    continue

                outcome = redundant.step(cycle)
                if outcome.kind is StepKind.CRASHED:
                    status = SchemeStatus.CRASHED
                    break
                if outcome.kind is not StepKind.COMMITTED:
                    continue
                redundant_commits += 1
                record = outcome.record
                if buffer.empty:
                    events.append(DetectionEvent(cycle, record.seq, DetectionCause.RESULT_MISMATCH,
                                                 "primary thread halted early"))
                    status = SchemeStatus.DETECTED
                    break
                occupancy = len(buffer)
                head = buffer.pop()
                slack.append(SlackSample(seq=record.seq, insns=occupancy, cycles=cycle - head.cycle))
                mismatch = compare_commits(head, record)
                if mismatch is not None:
                    events.append(DetectionEvent(cycle, record.seq, DetectionCause.RESULT_MISMATCH,
                                                 mismatch.describe()))
                    logger.debug(f"Comparison buffer mismatch at cycle {cycle}: {mismatch.describe()}")
                    status = SchemeStatus.DETECTED
                    break

        output = b""
        if status is SchemeStatus.HALTED:
            output = primary.memory.read_region(self.program.output_region)

        result = SchemeRunResult(
            scheme=self.name,
            status=status,
            cycles=cycle,
            commits=primary_commits,
            output=output,
            events=events,
            crash_reason=primary.crash_reason or redundant.crash_reason,
            verified_cycle=cycle,
            activity=[CoreActivity("smt", "smt", cycle, primary_commits + redundant_commits)],
            fault=fault,
            manifest_cycle=self.manifest_cycle(primary),
            slack=slack,
        )
        self.log_run_complete(result)
        return result


def run_rsmt(
    program: Program,
    limits: MachineLimits,
    fault: Optional[FaultSpec] = None,
    buffer_capacity: int = RSMT_BUFFER_CAPACITY,
    commit_width: int = RSMT_COMMIT_WIDTH,
    policy: str = RSMT_POLICY,
) -> SchemeRunResult:
    """Run ``program`` as a primary/redundant thread pair."""
    return RsmtScheme(program, limits, buffer_capacity, commit_width, policy).run(fault)


def measure_slack(slack_trace: List[SlackSample], unit: str = "insns") -> DistributionSummary:
    """
    Summarise re-execution slack.

    Args:
        slack_trace: Samples from one or more runs
        unit: ``insns`` or ``cycles``

    Returns:
        DistributionSummary of the chosen unit
    """
    if not slack_trace:
        raise CampaignError("slack trace is empty")
    if unit not in ("insns", "cycles"):
        raise CampaignError(f"unknown slack unit '{unit}'")
    return summarize([getattr(sample, unit) for sample in slack_trace])
