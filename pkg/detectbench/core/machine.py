"""
Deterministic cycle-stepped execution engine for the toy ISA.

One ``Core`` is one hardware thread: a program counter, a register file and
a memory port. The core itself knows nothing about redundancy; schemes drive
one or more cores and compare what they commit.
"""

from abc import ABC, abstractmethod
import logging
from typing import TYPE_CHECKING, Callable, Dict, List, Optional, Tuple

from ..config import WORD_MASK
from ..errors import StateMismatchError
from .isa import (
    PC_INDEX,
    ArchState,
    CommitRecord,
    CrashReason,
    Instruction,
    MachineLimits,
    Opcode,
    Program,
    RunResult,
    RunStatus,
    StepKind,
    StepOutcome,
    to_signed,
)

if TYPE_CHECKING:
    from ..injection.faults import FaultState

logger = logging.getLogger(__name__)


class CoreCrash(Exception):
    """Raised inside a step when the instruction cannot complete."""

    def __init__(self, reason: CrashReason):
        super().__init__(reason.value)
        self.reason = reason


class MemoryPort(ABC):
    """Where a core's loads and stores go."""

    @abstractmethod
    def load(self, address: int, seq: int) -> int:
        """Return the word at ``address`` for dynamic instruction ``seq``."""
        pass

    @abstractmethod
    def store(self, address: int, value: int, seq: int) -> None:
        """Write ``value`` to ``address`` for dynamic instruction ``seq``."""
        pass


class FlatMemory(MemoryPort):
    """Word-addressed memory of fixed size with bounds checking."""

    def __init__(self, words: List[int]):
        self.words = words

    @classmethod
    def for_program(cls, program: Program, limits: MachineLimits) -> "FlatMemory":
        return cls(program.initial_memory(limits.memory_words))

    def load(self, address: int, seq: int) -> int:
        if address >= len(self.words):
            raise CoreCrash(CrashReason.OUT_OF_BOUNDS_LOAD)
        return self.words[address]

    def store(self, address: int, value: int, seq: int) -> None:
        if address >= len(self.words):
            raise CoreCrash(CrashReason.OUT_OF_BOUNDS_STORE)
        self.words[address] = value

    def read_region(self, region: Tuple[int, int]) -> bytes:
        start, length = region
        return b"".join(word.to_bytes(8, "little") for word in self.words[start:start + length])


_ALU: Dict[Opcode, Callable[[int, int], int]] = {
    Opcode.ADD: lambda a, b: (a + b) & WORD_MASK,
    Opcode.SUB: lambda a, b: (a - b) & WORD_MASK,
    Opcode.MUL: lambda a, b: (a * b) & WORD_MASK,
    Opcode.AND: lambda a, b: a & b,
    Opcode.OR: lambda a, b: a | b,
    Opcode.XOR: lambda a, b: a ^ b,
    Opcode.SHL: lambda a, b: (a << (b & 63)) & WORD_MASK,
    Opcode.SHR: lambda a, b: a >> (b & 63),
}


class Core:
    """A single in-order scalar hardware thread."""

    def __init__(
        self,
        program: Program,
        limits: MachineLimits,
        memory: Optional[MemoryPort] = None,
        state: Optional[ArchState] = None,
        trace: bool = False,
    ):
        self.program = program
        self.limits = limits
        self.memory = memory if memory is not None else FlatMemory.for_program(program, limits)
        if state is not None:
            if len(state.regs) != limits.registers:
                raise StateMismatchError(
                    f"state has {len(state.regs)} registers, machine has {limits.registers}"
                )
            self.pc = state.pc
            self.regs = list(state.regs)
        else:
            self.pc = 0
            self.regs = [0] * limits.registers
        self.fault: Optional["FaultState"] = None
        self.cycle = 0
        self.seq = 0
        self.halted = False
        self.crash_reason: Optional[CrashReason] = None
        self.trace: Optional[List[CommitRecord]] = [] if trace else None

    @property
    def finished(self) -> bool:
        return self.halted or self.crash_reason is not None

    def read_reg(self, index: int) -> int:
        value = self.regs[index]
        if self.fault is not None:
            value = self.fault.on_read(index, value, self.cycle)
        return value

    def write_reg(self, index: int, value: int) -> None:
        self.regs[index] = value & WORD_MASK
        if self.fault is not None:
            self.fault.on_write(index, self.cycle)

    def arch_state(self) -> ArchState:
        """Snapshot of the state as the register file would be read right now."""
        regs = self.regs
        if self.fault is not None:
            regs = [self.fault.force(i, v, self.cycle) for i, v in enumerate(regs)]
        return ArchState(pc=self.pc, regs=tuple(regs))

    def step(self, cycle: Optional[int] = None) -> StepOutcome:
        """
        Advance one cycle and retire at most one instruction.

        Args:
            cycle: Global cycle number to execute in; defaults to the next
                cycle of this core's own clock. Schemes that interleave
                threads pass the shared clock.

        Returns:
            Committed, Crashed or Halted outcome
        """
        if self.finished:
            raise RuntimeError("step() on a finished core")

        if self.pc == len(self.program):
            self.halted = True
            return StepOutcome(StepKind.HALTED)

        self.cycle = self.cycle + 1 if cycle is None else cycle
        if self.fault is not None:
            self.fault.on_cycle(self.regs, self.cycle)

        insn = self.program.instructions[self.pc]
        try:
            result, next_pc = self._execute(insn)
        except CoreCrash as crash:
            self.crash_reason = crash.reason
            return StepOutcome(StepKind.CRASHED, reason=crash.reason)

        if not 0 <= next_pc <= len(self.program):
            self.crash_reason = CrashReason.INVALID_JUMP
            return StepOutcome(StepKind.CRASHED, reason=CrashReason.INVALID_JUMP)

        record = CommitRecord(seq=self.seq, static_index=self.pc, result=result, cycle=self.cycle)
        self.seq += 1
        self.pc = next_pc
        if self.trace is not None:
            self.trace.append(record)
        return StepOutcome(StepKind.COMMITTED, record=record)

    def _execute(self, insn: Instruction) -> Tuple[Tuple[int, ...], int]:
        op = insn.opcode
        next_pc = self.pc + 1

        alu = _ALU.get(op)
        if alu is not None:
            a = self.read_reg(insn.src1)
            b = self.read_reg(insn.src2) if insn.src2 is not None else insn.imm & WORD_MASK
            value = alu(a, b)
            self.write_reg(insn.dst, value)
            return (value,), next_pc

        if op is Opcode.DIVU:
            a = self.read_reg(insn.src1)
            b = self.read_reg(insn.src2) if insn.src2 is not None else insn.imm & WORD_MASK
            if b == 0:
                raise CoreCrash(CrashReason.DIVIDE_BY_ZERO)
            value = a // b
            self.write_reg(insn.dst, value)
            return (value,), next_pc

        if op is Opcode.LOADI:
            value = insn.imm & WORD_MASK
            self.write_reg(insn.dst, value)
            return (value,), next_pc

        if op is Opcode.LOAD:
            address = (self.read_reg(insn.src1) + insn.imm) & WORD_MASK
            value = self.memory.load(address, self.seq)
            self.write_reg(insn.dst, value)
            return (value,), next_pc

        if op is Opcode.STORE:
            address = (self.read_reg(insn.src1) + insn.imm) & WORD_MASK
            value = self.read_reg(insn.src2)
            self.memory.store(address, value, self.seq)
            return (address, value), next_pc

        if op is Opcode.JUMP:
            return (1, insn.target), insn.target

        if op is Opcode.HALT:
            self.halted = True
            return (), self.pc

        a = self.read_reg(insn.src1)
        b = self.read_reg(insn.src2)
        if op is Opcode.BEQ:
            taken = a == b
        elif op is Opcode.BNE:
            taken = a != b
        else:
            taken = to_signed(a) < to_signed(b)
        next_pc = insn.target if taken else next_pc
        return (int(taken), next_pc), next_pc


def run(
    program: Program,
    limits: MachineLimits,
    trace: bool = False,
    fault: Optional["FaultState"] = None,
) -> RunResult:
    """
    Run a program on one unprotected core.

    Args:
        program: Assembled program
        limits: Machine limits; ``max_cycles`` bounds the run
        trace: Keep every CommitRecord
        fault: Optional fault state to attach before the first cycle

    Returns:
        RunResult with status Halted, Crashed or TimedOut
    """
    core = Core(program, limits, trace=trace)
    if fault is not None:
        core.fault = fault
    memory = core.memory
    commits = 0

    while True:
        if core.cycle >= limits.max_cycles:
            status = RunStatus.TIMED_OUT
            break
        outcome = core.step()
        if outcome.kind is StepKind.COMMITTED:
            commits += 1
            if core.halted:
                status = RunStatus.HALTED
                break
        elif outcome.kind is StepKind.HALTED:
            status = RunStatus.HALTED
            break
        else:
            status = RunStatus.CRASHED
            break

    output = b""
    if status is RunStatus.HALTED and isinstance(memory, FlatMemory):
        output = memory.read_region(program.output_region)

    logger.debug(f"{program.name}: {status.value} after {core.cycle} cycles, {commits} commits")
    return RunResult(
        status=status,
        cycles=core.cycle,
        commits=commits,
        output=output,
        trace=core.trace,
        crash_reason=core.crash_reason,
        final_state=core.arch_state(),
    )


def diff_state(a: ArchState, b: ArchState) -> List[Tuple[int, int, int]]:
    """
    Registers (and the pc, as ``PC_INDEX``) whose values differ.

    Args:
        a: First architectural state
        b: Second architectural state

    Returns:
        List of ``(index, value_a, value_b)``; empty iff the states are identical
    """
    if len(a.regs) != len(b.regs):
        raise StateMismatchError(f"register files differ in size: {len(a.regs)} vs {len(b.regs)}")
    diffs = [(i, va, vb) for i, (va, vb) in enumerate(zip(a.regs, b.regs)) if va != vb]
    if a.pc != b.pc:
        diffs.append((PC_INDEX, a.pc, b.pc))
    return diffs
