"""
Assembler for the toy ISA.

Grammar (one statement per line, ``#`` starts a comment)::

    label:                      # labels end with ':' and may prefix a statement
    ADD   rd, rs1, rs2|imm      # also SUB MUL DIVU AND OR XOR SHL SHR
    LOADI rd, imm
    LOAD  rd, rbase[, offset]   # rd = mem[rbase + offset]
    STORE rs, rbase[, offset]   # mem[rbase + offset] = rs
    BEQ   rs1, rs2, target      # also BNE, BLT (signed)
    JUMP  target
    HALT
    .data   ADDR v0, v1, ...    # initial words starting at ADDR
    .output START LENGTH        # words whose final contents are the program output

Targets are labels or absolute instruction indices. Immediates accept
decimal, ``0x`` hexadecimal and a leading minus sign.
"""

import logging
import re
from pathlib import Path
from typing import Dict, List, Tuple

from ..config import MEMORY_WORDS, REGISTER_COUNT, WORD_MASK
from ..errors import AssemblyError
from .isa import ALU_OPS, BRANCH_OPS, Instruction, Opcode, Program

logger = logging.getLogger(__name__)

_LABEL_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_.]*)\s*:")
_REGISTER_RE = re.compile(r"^[rR](\d+)$")
_IMM_MIN = -(1 << 63)
_IMM_MAX = (1 << 64) - 1


class Assembler:
    """Two-pass assembler: collect labels, then encode instructions."""

    def __init__(self, registers: int = REGISTER_COUNT, memory_words: int = MEMORY_WORDS):
        self.registers = registers
        self.memory_words = memory_words

    def assemble(self, source_text: str, name: str = "program") -> Program:
        """
        Assemble source text into a Program.

        Args:
            source_text: Assembly source
            name: Program name carried into reports

        Returns:
            Program with every label resolved
        """
        statements, labels, data_init, output_region = self._first_pass(source_text)

        instructions = []
        for line_no, mnemonic, operands in statements:
            instructions.append(self._encode(line_no, mnemonic, operands, labels, len(statements)))

        start, length = output_region
        if start + length > self.memory_words:
            raise AssemblyError(
                f"output region [{start}, {start + length}) exceeds memory of {self.memory_words} words"
            )

        program = Program(
            instructions=tuple(instructions),
            data_init=data_init,
            output_region=output_region,
            name=name,
        )
        logger.debug(f"Assembled {name}: {len(program)} instructions, {len(data_init)} data words")
        return program

    def _first_pass(self, source_text: str):
        statements: List[Tuple[int, str, List[str]]] = []
        labels: Dict[str, int] = {}
        data_init: Dict[int, int] = {}
        output_region = (0, 0)

        for line_no, raw in enumerate(source_text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()

            # Labels, possibly several on one line
            while True:
                match = _LABEL_RE.match(line)
                if not match:
                    break
                label = match.group(1)
                if label in labels:
                    raise AssemblyError(f"duplicate label '{label}'", line_no)
                labels[label] = len(statements)
                line = line[match.end():].strip()

            if not line:
                continue

            parts = line.split(None, 1)
            head = parts[0]
            rest = parts[1] if len(parts) > 1 else ""
            operands = [tok for tok in re.split(r"[,\s]+", rest.strip()) if tok]

            if head.startswith("."):
                directive = head.lower()
                if directive == ".data":
                    if len(operands) < 2:
                        raise AssemblyError(".data needs an address and at least one value", line_no)
                    address = self._parse_int(operands[0], line_no)
                    for offset, token in enumerate(operands[1:]):
                        target = address + offset
                        if not 0 <= target < self.memory_words:
                            raise AssemblyError(f"data address {target} outside memory", line_no)
                        data_init[target] = self._parse_int(token, line_no) & WORD_MASK
                elif directive == ".output":
                    if len(operands) != 2:
                        raise AssemblyError(".output needs START LENGTH", line_no)
                    start = self._parse_int(operands[0], line_no)
                    length = self._parse_int(operands[1], line_no)
                    if start < 0 or length < 0:
                        raise AssemblyError(".output bounds must be non-negative", line_no)
                    output_region = (start, length)
                else:
                    raise AssemblyError(f"unknown directive '{head}'", line_no)
                continue

            statements.append((line_no, head.upper(), operands))

        return statements, labels, data_init, output_region

    def _encode(
        self,
        line_no: int,
        mnemonic: str,
        operands: List[str],
        labels: Dict[str, int],
        program_length: int,
    ) -> Instruction:
        try:
            op = Opcode(mnemonic)
        except ValueError:
            raise AssemblyError(f"unknown opcode '{mnemonic}'", line_no) from None

        def expect(*counts: int):
            if len(operands) not in counts:
                wanted = " or ".join(str(c) for c in counts)
                raise AssemblyError(f"{op.value} takes {wanted} operands, got {len(operands)}", line_no)

        if op in ALU_OPS:
            expect(3)
            dst = self._parse_register(operands[0], line_no)
            src1 = self._parse_register(operands[1], line_no)
            if _REGISTER_RE.match(operands[2]):
                return Instruction(op, dst=dst, src1=src1, src2=self._parse_register(operands[2], line_no), line=line_no)
            return Instruction(op, dst=dst, src1=src1, imm=self._parse_int(operands[2], line_no), line=line_no)

        if op is Opcode.LOADI:
            expect(2)
            return Instruction(op, dst=self._parse_register(operands[0], line_no),
                               imm=self._parse_int(operands[1], line_no), line=line_no)

        if op is Opcode.LOAD:
            expect(2, 3)
            offset = self._parse_int(operands[2], line_no) if len(operands) == 3 else 0
            return Instruction(op, dst=self._parse_register(operands[0], line_no),
                               src1=self._parse_register(operands[1], line_no), imm=offset, line=line_no)

        if op is Opcode.STORE:
            expect(2, 3)
            offset = self._parse_int(operands[2], line_no) if len(operands) == 3 else 0
            return Instruction(op, src2=self._parse_register(operands[0], line_no),
                               src1=self._parse_register(operands[1], line_no), imm=offset, line=line_no)

        if op in BRANCH_OPS:
            expect(3)
            return Instruction(op, src1=self._parse_register(operands[0], line_no),
                               src2=self._parse_register(operands[1], line_no),
                               target=self._resolve_target(operands[2], labels, program_length, line_no),
                               line=line_no)

        if op is Opcode.JUMP:
            expect(1)
            return Instruction(op, target=self._resolve_target(operands[0], labels, program_length, line_no),
                               line=line_no)

        expect(0)
        return Instruction(Opcode.HALT, line=line_no)

    def _parse_register(self, token: str, line_no: int) -> int:
        match = _REGISTER_RE.match(token)
        if not match:
            raise AssemblyError(f"expected a register, got '{token}'", line_no)
        index = int(match.group(1))
        if index >= self.registers:
            raise AssemblyError(f"register r{index} out of range (R={self.registers})", line_no)
        return index

    def _parse_int(self, token: str, line_no: int) -> int:
        try:
            value = int(token, 0)
        except ValueError:
            raise AssemblyError(f"expected an integer, got '{token}'", line_no) from None
        if not _IMM_MIN <= value <= _IMM_MAX:
            raise AssemblyError(f"immediate {token} does not fit in 64 bits", line_no)
        return value

    def _resolve_target(self, token: str, labels: Dict[str, int], program_length: int, line_no: int) -> int:
        if token in labels:
            return labels[token]
        try:
            target = int(token, 0)
        except ValueError:
            raise AssemblyError(f"undefined label '{token}'", line_no) from None
        if not 0 <= target <= program_length:
            raise AssemblyError(f"target {target} outside [0, {program_length}]", line_no)
        return target


def assemble(
    source_text: str,
    name: str = "program",
    registers: int = REGISTER_COUNT,
    memory_words: int = MEMORY_WORDS,
) -> Program:
    """Assemble source text with the given register-file and memory sizes."""
    return Assembler(registers=registers, memory_words=memory_words).assemble(source_text, name=name)


def assemble_file(
    path: Path,
    registers: int = REGISTER_COUNT,
    memory_words: int = MEMORY_WORDS,
) -> Program:
    """Assemble a ``.asm`` file; the program is named after the file stem."""
    path = Path(path)
    return assemble(path.read_text(), name=path.stem, registers=registers, memory_words=memory_words)


def render_listing(program: Program) -> List[str]:
    """Human-readable listing, one line per instruction."""
    return [f"{index:5d}  {insn.render()}" for index, insn in enumerate(program.instructions)]


def output_words(program: Program, output: bytes) -> List[int]:
    """Decode an output blob back into 64-bit words."""
    return [int.from_bytes(output[i:i + 8], "little") for i in range(0, len(output), 8)]

