"""
Toy ISA definitions: opcodes, instructions, programs and run records.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..config import (
    HANG_MULTIPLIER,
    MAX_CYCLES,
    MEMORY_WORDS,
    REGISTER_COUNT,
    WORD_MASK,
)

# Reserved index used by diff_state to report a program-counter divergence
PC_INDEX = -1


class Opcode(str, Enum):
    ADD = "ADD"
    SUB = "SUB"
    MUL = "MUL"
    DIVU = "DIVU"
    AND = "AND"
    OR = "OR"
    XOR = "XOR"
    SHL = "SHL"
    SHR = "SHR"
    LOADI = "LOADI"
    LOAD = "LOAD"
    STORE = "STORE"
    BEQ = "BEQ"
    BNE = "BNE"
    BLT = "BLT"
    JUMP = "JUMP"
    HALT = "HALT"


ALU_OPS = frozenset({
    Opcode.ADD, Opcode.SUB, Opcode.MUL, Opcode.DIVU, Opcode.AND,
    Opcode.OR, Opcode.XOR, Opcode.SHL, Opcode.SHR,
})
BRANCH_OPS = frozenset({Opcode.BEQ, Opcode.BNE, Opcode.BLT})


def to_signed(value: int) -> int:
    """Interpret a 64-bit word as a two's-complement integer."""
    value &= WORD_MASK
    return value - (1 << 64) if value >> 63 else value


@dataclass(frozen=True)
class Instruction:
    """
    One assembled instruction.

    ALU ops use ``src2`` when it is a register and ``imm`` otherwise.
    STORE keeps the base register in ``src1`` and the value register in ``src2``.
    """
    opcode: Opcode
    dst: Optional[int] = None
    src1: Optional[int] = None
    src2: Optional[int] = None
    imm: int = 0
    target: Optional[int] = None
    line: int = 0

    def registers(self) -> Tuple[int, ...]:
        """All register indices the instruction names."""
        return tuple(r for r in (self.dst, self.src1, self.src2) if r is not None)

    def render(self) -> str:
        op = self.opcode
        if op in ALU_OPS:
            rhs = f"r{self.src2}" if self.src2 is not None else str(self.imm)
            return f"{op.value} r{self.dst}, r{self.src1}, {rhs}"
        if op is Opcode.LOADI:
            return f"LOADI r{self.dst}, {self.imm}"
        if op is Opcode.LOAD:
            return f"LOAD r{self.dst}, r{self.src1}, {self.imm}"
        if op is Opcode.STORE:
            return f"STORE r{self.src2}, r{self.src1}, {self.imm}"
        if op in BRANCH_OPS:
            return f"{op.value} r{self.src1}, r{self.src2}, {self.target}"
        if op is Opcode.JUMP:
            return f"JUMP {self.target}"
        return op.value


@dataclass(frozen=True)
class Program:
    """Assembled code plus its initial memory image and output region."""
    instructions: Tuple[Instruction, ...]
    data_init: Dict[int, int] = field(default_factory=dict)
    output_region: Tuple[int, int] = (0, 0)  # (start address, length in words)
    name: str = "program"

    def __len__(self) -> int:
        return len(self.instructions)

    def initial_memory(self, memory_words: int) -> List[int]:
        """Materialise the memory image for one machine."""
        memory = [0] * memory_words
        for address, value in self.data_init.items():
            memory[address] = value & WORD_MASK
        return memory


@dataclass(frozen=True)
class ArchState:
    """Program counter plus general-purpose register file."""
    pc: int
    regs: Tuple[int, ...]


@dataclass(frozen=True)
class CommitRecord:
    """
    One retired instruction.

    ``result`` is ``(value,)`` for ALU/LOAD/LOADI, ``(address, value)`` for
    STORE, ``(taken, next_pc)`` for branches and jumps and ``()`` for HALT.
    """
    seq: int
    static_index: int
    result: Tuple[int, ...]
    cycle: int


class MachineLimits(BaseModel):
    """Resource and termination limits shared by every machine in a run."""
    model_config = ConfigDict(frozen=True)

    max_cycles: int = Field(default=MAX_CYCLES, ge=1)
    memory_words: int = Field(default=MEMORY_WORDS, ge=1)
    hang_multiplier: float = HANG_MULTIPLIER
    registers: int = Field(default=REGISTER_COUNT, ge=1)

    @field_validator("hang_multiplier")
    @classmethod
    def _hang_multiplier_above_one(cls, value: float) -> float:
        if value <= 1:
            raise ValueError("hang_multiplier must be greater than 1")
        return value


class RunStatus(str, Enum):
    HALTED = "halted"
    CRASHED = "crashed"
    TIMED_OUT = "timed_out"


class CrashReason(str, Enum):
    OUT_OF_BOUNDS_LOAD = "out_of_bounds_load"
    OUT_OF_BOUNDS_STORE = "out_of_bounds_store"
    DIVIDE_BY_ZERO = "divide_by_zero"
    INVALID_JUMP = "invalid_jump"


class StepKind(str, Enum):
    COMMITTED = "committed"
    CRASHED = "crashed"
    HALTED = "halted"


@dataclass(frozen=True)
class StepOutcome:
    kind: StepKind
    record: Optional[CommitRecord] = None
    reason: Optional[CrashReason] = None


@dataclass
class RunResult:
    """Outcome of driving a single core to completion."""
    status: RunStatus
    cycles: int
    commits: int
    output: bytes = b""
    trace: Optional[List[CommitRecord]] = None
    crash_reason: Optional[CrashReason] = None
    final_state: Optional[ArchState] = None

    @property
    def ipc(self) -> float:
        if self.cycles <= 0:
            return 0.0
        return self.commits / self.cycles
