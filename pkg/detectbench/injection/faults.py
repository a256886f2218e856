"""
Register-file fault model: single-bit transient flips and stuck-at bits.

A ``FaultState`` is installed on exactly one core and sees every register
read and write of that core. Transient flips mutate the stored value once;
stuck-at faults never touch the stored value and instead force the bit on
every read from the injection cycle onwards.
"""

import logging
import re
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..config import WORD_BITS, WORD_MASK
from ..core.machine import Core
from ..errors import FaultSpecError

logger = logging.getLogger(__name__)

_FAULT_RE = re.compile(r"^(transient|sa0|sa1):r?(\d+):(\d+):(\d+)$", re.IGNORECASE)


class FaultKind(str, Enum):
    TRANSIENT_FLIP = "transient"
    STUCK_AT_0 = "sa0"
    STUCK_AT_1 = "sa1"

    @property
    def is_permanent(self) -> bool:
        return self is not FaultKind.TRANSIENT_FLIP

    @property
    def family(self) -> str:
        """Reporting family: ``transient`` or ``permanent``."""
        return "permanent" if self.is_permanent else "transient"


class FaultSpec(BaseModel):
    """One injected fault."""
    model_config = ConfigDict(frozen=True)

    kind: FaultKind
    reg: int = Field(ge=0)
    bit: int = Field(ge=0, lt=WORD_BITS)
    inject_cycle: int = Field(ge=0)
    id: int = 0

    def label(self) -> str:
        return f"{self.kind.value}:r{self.reg}:{self.bit}:{self.inject_cycle}"


def parse_fault(text: str, fault_id: int = 0) -> FaultSpec:
    """
    Parse ``kind:rREG:BIT:CYCLE``, e.g. ``transient:r5:3:100`` or ``sa1:r3:0:10``.
    """
    match = _FAULT_RE.match(text.strip())
    if not match:
        raise FaultSpecError(f"cannot parse fault '{text}' (expected kind:rREG:BIT:CYCLE)")
    kind, reg, bit, cycle = match.groups()
    try:
        return FaultSpec(kind=FaultKind(kind.lower()), reg=int(reg), bit=int(bit),
                         inject_cycle=int(cycle), id=fault_id)
    except ValueError as e:
        raise FaultSpecError(str(e)) from None


class FaultState:
    """Per-machine runtime state of one fault."""

    def __init__(self, spec: FaultSpec):
        self.spec = spec
        self.mask = 1 << spec.bit
        self.armed = True
        self.fired = False
        self.overwritten = False
        self.original: Optional[int] = None
        self.mutations = 0
        self.first_manifest_cycle: Optional[int] = None

    def on_cycle(self, regs: List[int], cycle: int) -> None:
        """Apply a pending transient flip at the first cycle >= inject_cycle."""
        if self.fired or self.spec.kind is not FaultKind.TRANSIENT_FLIP:
            return
        if cycle < self.spec.inject_cycle:
            return
        self.original = regs[self.spec.reg]
        regs[self.spec.reg] = (self.original ^ self.mask) & WORD_MASK
        self.fired = True
        self.armed = False
        self.mutations += 1
        logger.debug(f"Transient flip on r{self.spec.reg} bit {self.spec.bit} at cycle {cycle}")

    def force(self, index: int, value: int, cycle: int) -> int:
        """Value a read of ``index`` returns at ``cycle``; no bookkeeping."""
        spec = self.spec
        if index != spec.reg or spec.kind is FaultKind.TRANSIENT_FLIP or cycle < spec.inject_cycle:
            return value
        if spec.kind is FaultKind.STUCK_AT_1:
            return value | self.mask
        return value & ~self.mask

    def on_read(self, index: int, value: int, cycle: int) -> int:
        forced = self.force(index, value, cycle)
        if self.first_manifest_cycle is None and index == self.spec.reg:
            corrupted = forced != value or (self.fired and not self.overwritten)
            if corrupted:
                self.first_manifest_cycle = cycle
        return forced

    def on_write(self, index: int, cycle: int) -> None:
        if self.fired and index == self.spec.reg:
            self.overwritten = True


def fault_active(state: FaultState, cycle: int) -> bool:
    """True iff the fault perturbs reads of its register at ``cycle``."""
    if cycle < state.spec.inject_cycle:
        return False
    if state.spec.kind is FaultKind.TRANSIENT_FLIP:
        return not state.overwritten
    return True


def attach_fault(core: Core, spec: FaultSpec) -> Core:
    """
    Install a fault on a core that has not started yet.

    Args:
        core: Machine at cycle 0
        spec: Fault to install

    Returns:
        The same core, now faulted
    """
    if core.cycle != 0:
        raise FaultSpecError(f"faults must be attached at cycle 0, core is at cycle {core.cycle}")
    if spec.reg >= len(core.regs):
        raise FaultSpecError(f"fault targets r{spec.reg} but the register file has {len(core.regs)} entries")
    core.fault = FaultState(spec)
    return core
