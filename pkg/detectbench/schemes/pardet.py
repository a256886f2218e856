"""
Parallel error detection.

The main core runs unhindered apart from checkpoint stalls. Its execution is
cut into segments; each segment's start and end architectural states plus
its load-store log are handed to one of several slow checker cores, which
replays the segment from the start state and compares the state it reaches
with the recorded end state.

Replays are computed eagerly when a segment is handed off; only the cycle at
which a checker would finish comes from the timing model, so the result does
not depend on when the replay actually runs.
"""

from dataclasses import dataclass, field
import logging
import math
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict

from ..config import (
    PARDET_CHECKERS,
    PARDET_CHECKPOINT_COST,
    PARDET_LOG_ENTRIES,
    PARDET_SEGMENT_INSNS,
    PARDET_SPEED_RATIO,
)
from ..core.isa import PC_INDEX, ArchState, CrashReason, MachineLimits, Program, StepKind
from ..core.machine import Core, FlatMemory, MemoryPort, diff_state
from ..errors import ConfigError
from ..injection.faults import FaultSpec
from .base_scheme import (
    BaseScheme,
    CoreActivity,
    DetectionCause,
    DetectionEvent,
    SchemeRunResult,
    SchemeStatus,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LogEntry:
    seq: int
    address: int
    value: int
    is_load: bool


class LoadStoreLog:
    """
    Duplicate of every main-core memory access, one segment buffer at a time.

    Sealing hands the current buffer to the caller for its checker and
    starts an empty one for the next segment.
    """

    def __init__(self, entries_per_segment: int = PARDET_LOG_ENTRIES):
        if entries_per_segment < 1:
            raise ConfigError("log segments need at least one entry")
        self.entries_per_segment = entries_per_segment
        self.current: List[LogEntry] = []
        self.sealed = 0

    @property
    def full(self) -> bool:
        return len(self.current) >= self.entries_per_segment

    def record(self, entry: LogEntry) -> None:
        self.current.append(entry)

    def seal(self) -> Tuple[LogEntry, ...]:
        segment = tuple(self.current)
        self.current = []
        self.sealed += 1
        return segment


class LoggingMemory(MemoryPort):
    """Main-core memory port that mirrors every access into the log."""

    def __init__(self, memory: FlatMemory, log: LoadStoreLog):
        self.memory = memory
        self.log = log

    def load(self, address: int, seq: int) -> int:
        value = self.memory.load(address, seq)
        self.log.record(LogEntry(seq, address, value, True))
        return value

    def store(self, address: int, value: int, seq: int) -> None:
        self.memory.store(address, value, seq)
        self.log.record(LogEntry(seq, address, value, False))

    def read_region(self, region: Tuple[int, int]) -> bytes:
        return self.memory.read_region(region)


class LogReplayMemory(MemoryPort):
    """Checker memory port served from a sealed log segment, never from live memory."""

    def __init__(self, entries: Tuple[LogEntry, ...]):
        self.entries = entries
        self.position = 0
        self.divergences: List[str] = []

    def _next(self, seq: int, address: int, is_load: bool) -> Optional[LogEntry]:
        if self.position >= len(self.entries):
            self.divergences.append(f"seq {seq}: log underrun")
            return None
        entry = self.entries[self.position]
        self.position += 1
        kind = "load" if is_load else "store"
        if entry.is_load != is_load:
            self.divergences.append(f"seq {seq}: replay issued a {kind} where the log holds "
                                    f"a {'load' if entry.is_load else 'store'}")
        elif entry.address != address:
            self.divergences.append(f"seq {seq}: {kind} address {address} vs logged {entry.address}")
        return entry

    def load(self, address: int, seq: int) -> int:
        entry = self._next(seq, address, True)
        return entry.value if entry is not None else 0

    def store(self, address: int, value: int, seq: int) -> None:
        entry = self._next(seq, address, False)
        if entry is not None and not entry.is_load and entry.value != value:
            self.divergences.append(f"seq {seq}: store value {value} vs logged {entry.value}")

    @property
    def leftover(self) -> int:
        return len(self.entries) - self.position


@dataclass(frozen=True)
class Checkpoint:
    """Architectural state at one end of a segment."""
    state: ArchState
    seq_start: int
    seq_end: int
    created_cycle: int

    @property
    def insns(self) -> int:
        return self.seq_end - self.seq_start


@dataclass(frozen=True)
class SegmentMismatch:
    """Evidence that a replayed segment diverged from the main core."""
    segment: int
    registers: Tuple[Tuple[int, int, int], ...] = ()
    log_divergences: Tuple[str, ...] = ()
    crash_reason: Optional[CrashReason] = None

    def describe(self) -> str:
        parts = []
        for index, replayed, recorded in self.registers:
            name = "pc" if index == PC_INDEX else f"r{index}"
            parts.append(f"{name} {replayed:#x} vs {recorded:#x}")
        parts.extend(self.log_divergences)
        if self.crash_reason is not None:
            parts.append(f"replay crashed ({self.crash_reason.value})")
        return f"segment {self.segment}: " + "; ".join(parts)


def verify_segment(
    start: Checkpoint,
    log_segment: Tuple[LogEntry, ...],
    end: Checkpoint,
    program: Program,
    limits: MachineLimits,
    segment: int = 0,
) -> Optional[SegmentMismatch]:
    """
    Replay one segment on a fault-free checker and compare end states.

    Args:
        start: Checkpoint the replay starts from
        log_segment: Memory traffic the main core produced in the segment
        end: Checkpoint the replay must reach
        program: Program being checked
        limits: Machine limits (register-file size)
        segment: Segment id carried into the mismatch

    Returns:
        SegmentMismatch if the replayed state, memory traffic or replay
        itself diverges, else None
    """
    memory = LogReplayMemory(log_segment)
    checker = Core(program, limits, memory=memory, state=start.state)
    checker.seq = start.seq_start

    crash = None
    for _ in range(end.seq_end - start.seq_start):
        if checker.finished:
            break
        outcome = checker.step()
        if outcome.kind is StepKind.CRASHED:
            crash = outcome.reason
            break

    divergences = list(memory.divergences)
    if crash is None and memory.leftover:
        divergences.append(f"{memory.leftover} logged accesses never replayed")
    diffs = diff_state(checker.arch_state(), end.state)
    if not diffs and not divergences and crash is None:
        return None
    return SegmentMismatch(segment=segment, registers=tuple(diffs),
                           log_divergences=tuple(divergences), crash_reason=crash)


class CheckerStats(BaseModel):
    """Checker-core utilisation over one run."""
    model_config = ConfigDict(frozen=True)

    n_checkers: int
    segments: int
    busy_cycles: List[int]
    peak_concurrency: int
    all_busy_stall_cycles: int
    checkpoint_stall_cycles: int


@dataclass
class CheckerCore:
    """One slow checker; segments run back to back at ``speed_ratio`` commits per cycle."""
    index: int
    speed_ratio: float = PARDET_SPEED_RATIO
    free_at: int = 0
    intervals: List[Tuple[int, int, int]] = field(default_factory=list)  # (start, end exclusive, insns)

    def busy(self, cycle: int) -> bool:
        return cycle < self.free_at

    def replay_cycles(self, insns: int) -> int:
        return max(1, math.ceil(insns / self.speed_ratio))

    def assign(self, cycle: int, insns: int) -> int:
        """Start a replay at ``cycle``; returns the cycle the replay completes in."""
        duration = self.replay_cycles(insns)
        self.free_at = cycle + duration
        self.intervals.append((cycle, cycle + duration, insns))
        return cycle + duration - 1


@dataclass
class _PendingCheck:
    segment: int
    start_cycle: int
    done_cycle: int
    checker: int
    mismatch: Optional[SegmentMismatch]


def peak_concurrency(checkers: List[CheckerCore]) -> int:
    """Largest number of checkers busy in the same cycle."""
    edges = []
    for checker in checkers:
        for start, end, _ in checker.intervals:
            edges.append((start, 1))
            edges.append((end, -1))
    # Ends sort before starts at the same cycle
    edges.sort(key=lambda e: (e[0], e[1]))
    busy = peak = 0
    for _, delta in edges:
        busy += delta
        peak = max(peak, busy)
    return peak


class PardetScheme(BaseScheme):
    """Main core plus a pool of checker cores verifying segments in parallel."""

    name = "pardet"

    def __init__(
        self,
        program: Program,
        limits: MachineLimits,
        n_checkers: int = PARDET_CHECKERS,
        segment_insns: int = PARDET_SEGMENT_INSNS,
        speed_ratio: float = PARDET_SPEED_RATIO,
        checkpoint_cost: int = PARDET_CHECKPOINT_COST,
        log_entries_per_segment: int = PARDET_LOG_ENTRIES,
    ):
        super().__init__(program, limits)
        if n_checkers < 1:
            raise ConfigError(f"n_checkers must be >= 1, got {n_checkers}")
        if segment_insns < 1:
            raise ConfigError(f"segment_insns must be >= 1, got {segment_insns}")
        if not 0.0 < speed_ratio <= 1.0:
            raise ConfigError(f"speed_ratio must lie in (0, 1], got {speed_ratio}")
        if checkpoint_cost < 0:
            raise ConfigError(f"checkpoint_cost must be >= 0, got {checkpoint_cost}")
        self.n_checkers = n_checkers
        self.segment_insns = segment_insns
        self.speed_ratio = speed_ratio
        self.checkpoint_cost = checkpoint_cost
        self.log_entries_per_segment = log_entries_per_segment

    def describe(self) -> Dict[str, Any]:
        return {
            "scheme": "pardet",
            "n_checkers": self.n_checkers,
            "segment_insns": self.segment_insns,
            "speed_ratio": self.speed_ratio,
            "checkpoint_cost": self.checkpoint_cost,
            "log_entries_per_segment": self.log_entries_per_segment,
        }

    def run(self, fault: Optional[FaultSpec] = None) -> SchemeRunResult:
        self.log_run_start(fault)
        log = LoadStoreLog(self.log_entries_per_segment)
        memory = LoggingMemory(FlatMemory.for_program(self.program, self.limits), log)
        main = self.make_core(fault, memory=memory)
        checkers = [CheckerCore(i, self.speed_ratio) for i in range(self.n_checkers)]
        pending: List[_PendingCheck] = []

        clock = 0
        commits = 0
        next_checker = 0
        all_busy_stalls = 0
        checkpoint_stalls = 0
        start = Checkpoint(main.arch_state(), 0, 0, 0)
        status: Optional[SchemeStatus] = None
        earliest: Optional[_PendingCheck] = None  # earliest-finishing mismatching check
        detection: Optional[_PendingCheck] = None

        while status is None:
            if earliest is not None and earliest.done_cycle <= clock:
                detection = earliest
                status = SchemeStatus.DETECTED
                break
            if clock >= self.limits.max_cycles:
                status = SchemeStatus.TIMED_OUT
                break

            outcome = main.step(clock + 1)
            if outcome.kind is StepKind.CRASHED:
                clock = main.cycle
                status = SchemeStatus.CRASHED
                break
            if outcome.kind is StepKind.COMMITTED:
                clock = main.cycle
                commits += 1

            insns = main.seq - start.seq_start
            boundary = main.halted or insns >= self.segment_insns or log.full
            if boundary and insns > 0:
                clock += self.checkpoint_cost
                checkpoint_stalls += self.checkpoint_cost
                end = Checkpoint(main.arch_state(), start.seq_start, main.seq, clock)
                segment = log.sealed
                log_segment = log.seal()

                # Round-robin to the next free checker; stall while all are busy
                free = [c for c in checkers if not c.busy(clock)]
                if not free:
                    resume = min(c.free_at for c in checkers)
                    all_busy_stalls += resume - clock
                    clock = resume
                order = checkers[next_checker:] + checkers[:next_checker]
                checker = next(c for c in order if not c.busy(clock))
                next_checker = (checker.index + 1) % self.n_checkers

                done = checker.assign(clock, end.insns)
                mismatch = verify_segment(start, log_segment, end, self.program, self.limits, segment)
                check = _PendingCheck(segment, clock, done, checker.index, mismatch)
                pending.append(check)
                if mismatch is not None and (earliest is None or done < earliest.done_cycle):
                    earliest = check
                logger.debug(f"Segment {segment} ({end.insns} insns) to checker {checker.index}, "
                             f"done at cycle {done}{' MISMATCH' if mismatch else ''}")
                # The next segment starts where this one ended
                start = Checkpoint(end.state, end.seq_end, end.seq_end, clock)

            if main.halted:
                detection = earliest
                status = SchemeStatus.DETECTED if detection is not None else SchemeStatus.HALTED

        events = []
        if detection is not None:
            events.append(DetectionEvent(detection.done_cycle, detection.segment,
                                         DetectionCause.STATE_MISMATCH, detection.mismatch.describe()))

        cut_at = None
        if status is SchemeStatus.DETECTED:
            cut_at = detection.done_cycle
        elif status is not SchemeStatus.HALTED:
            cut_at = clock
        activity = [CoreActivity("main", "main", clock if cut_at is None else min(clock, cut_at), commits)]
        for checker in checkers:
            busy, replayed = self._checker_activity(checker, cut_at)
            activity.append(CoreActivity(f"checker{checker.index}", "checker", busy, replayed))

        verified = max((p.done_cycle for p in pending), default=clock)
        output = b""
        if status is SchemeStatus.HALTED:
            output = memory.read_region(self.program.output_region)

        stats = CheckerStats(
            n_checkers=self.n_checkers,
            segments=len(pending),
            busy_cycles=[a.active_cycles for a in activity[1:]],
            peak_concurrency=peak_concurrency(checkers),
            all_busy_stall_cycles=all_busy_stalls,
            checkpoint_stall_cycles=checkpoint_stalls,
        )
        result = SchemeRunResult(
            scheme=self.name,
            status=status,
            cycles=activity[0].active_cycles,
            commits=commits,
            output=output,
            events=events,
            crash_reason=main.crash_reason,
            verified_cycle=verified if cut_at is None else min(verified, cut_at),
            activity=activity,
            fault=fault,
            manifest_cycle=self.manifest_cycle(main),
            checker_stats=stats,
        )
        self.log_run_complete(result)
        return result

    @staticmethod
    def _checker_activity(checker: CheckerCore, cut_at: Optional[int]) -> Tuple[int, int]:
        """Busy cycles and replayed instructions, prorated for replays cut short."""
        busy = replayed = 0
        for start, end, insns in checker.intervals:
            if cut_at is not None:
                if start > cut_at:
                    continue
                if end - 1 > cut_at:
                    done = cut_at - start + 1
                    busy += done
                    replayed += insns * done // (end - start)
                    continue
            busy += end - start
            replayed += insns
        return busy, replayed


def run_pardet(
    program: Program,
    limits: MachineLimits,
    fault: Optional[FaultSpec] = None,
    n_checkers: int = PARDET_CHECKERS,
    segment_insns: int = PARDET_SEGMENT_INSNS,
    speed_ratio: float = PARDET_SPEED_RATIO,
    checkpoint_cost: int = PARDET_CHECKPOINT_COST,
    log_entries_per_segment: int = PARDET_LOG_ENTRIES,
) -> SchemeRunResult:
    """Run ``program`` on a main core verified by ``n_checkers`` checker cores."""
    scheme = PardetScheme(program, limits, n_checkers, segment_insns, speed_ratio,
                          checkpoint_cost, log_entries_per_segment)
    return scheme.run(fault)
