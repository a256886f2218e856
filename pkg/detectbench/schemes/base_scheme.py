"""
Abstract base class for all error-detection schemes.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
import logging
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Tuple

from ..core.isa import CommitRecord, CrashReason, MachineLimits, Program
from ..core.machine import Core, MemoryPort
from ..errors import InvariantViolation
from ..injection.faults import FaultSpec, attach_fault

if TYPE_CHECKING:
    from .pardet import CheckerStats
    from .rsmt import SlackSample

logger = logging.getLogger(__name__)


class DetectionCause(str, Enum):
    RESULT_MISMATCH = "result_mismatch"
    STATE_MISMATCH = "state_mismatch"


@dataclass(frozen=True)
class DetectionEvent:
    """
    A scheme noticing a divergence.

    ``seq`` is the dynamic instruction that mismatched, or the segment id for
    state-comparing schemes.
    """
    cycle: int
    seq: int
    cause: DetectionCause
    detail: str = ""


@dataclass(frozen=True)
class Mismatch:
    """Two commit records that should have been identical."""
    seq: int
    static_index: Tuple[int, int]
    result: Tuple[Tuple[int, ...], Tuple[int, ...]]

    def describe(self) -> str:
        return (f"seq {self.seq}: pc {self.static_index[0]} vs {self.static_index[1]}, "
                f"result {self.result[0]} vs {self.result[1]}")


class SchemeStatus(str, Enum):
    HALTED = "halted"
    DETECTED = "detected"
    CRASHED = "crashed"
    TIMED_OUT = "timed_out"


@dataclass
class CoreActivity:
    """Activity of one physical core, input to the power model."""
    name: str
    kind: str  # "main", "smt" or "checker"
    active_cycles: int
    commits: int


@dataclass
class SchemeRunResult:
    """
    Outcome of running a program under one scheme.

    ``cycles`` is the time the protected program occupies the main core and
    is what IPC and slowdown are computed from; ``verified_cycle`` is when
    the last verification finished, which is later for ParDet.
    """
    scheme: str
    status: SchemeStatus
    cycles: int
    commits: int
    output: bytes = b""
    events: List[DetectionEvent] = field(default_factory=list)
    crash_reason: Optional[CrashReason] = None
    verified_cycle: int = 0
    activity: List[CoreActivity] = field(default_factory=list)
    fault: Optional[FaultSpec] = None
    manifest_cycle: Optional[int] = None
    slack: List["SlackSample"] = field(default_factory=list)
    checker_stats: Optional["CheckerStats"] = None

    @property
    def ipc(self) -> float:
        if self.cycles <= 0:
            return 0.0
        return self.commits / self.cycles

    @property
    def detected(self) -> bool:
        return bool(self.events)


def compare_commits(a: CommitRecord, b: CommitRecord) -> Optional[Mismatch]:
    """
    Compare two commit records of the same dynamic instruction.

    Args:
        a: Record from the checked thread or core
        b: Record from the redundant thread or core

    Returns:
        Mismatch iff static index or result differ, else None
    """
    if a.seq != b.seq:
        raise InvariantViolation(f"commit streams misaligned: seq {a.seq} vs {b.seq}")
    if a.static_index == b.static_index and a.result == b.result:
        return None
    return Mismatch(seq=a.seq, static_index=(a.static_index, b.static_index), result=(a.result, b.result))


class BaseScheme(ABC):
    """Abstract base class for error-detection schemes."""

    name = "base"

    def __init__(self, program: Program, limits: MachineLimits):
        self.program = program
        self.limits = limits

    @abstractmethod
    def run(self, fault: Optional[FaultSpec] = None) -> SchemeRunResult:
        """
        Run the program under this scheme.

        Args:
            fault: Optional fault injected into the main core's register file

        Returns:
            SchemeRunResult
        """
        pass

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        """Configuration block of this scheme instance."""
        pass

    def make_core(
        self,
        fault: Optional[FaultSpec] = None,
        memory: Optional[MemoryPort] = None,
    ) -> Core:
        """Create a core at cycle 0, optionally faulted."""
        core = Core(self.program, self.limits, memory=memory)
        if fault is not None:
            attach_fault(core, fault)
        return core

    def manifest_cycle(self, core: Core) -> Optional[int]:
        return core.fault.first_manifest_cycle if core.fault is not None else None

    def log_run_start(self, fault: Optional[FaultSpec]):
        """Log the start of a run."""
        target = fault.label() if fault else "fault-free"
        logger.debug(f"Starting {self.name} run: {self.program.name} ({target})")

    def log_run_complete(self, result: SchemeRunResult):
        """Log the end of a run."""
        logger.debug(f"{self.name} run complete: {self.program.name} {result.status.value} "
                     f"after {result.cycles} cycles ({len(result.events)} detections)")
