import pytest

from detectbench.core.assembler import assemble
from detectbench.core.isa import PC_INDEX, ArchState, CrashReason, MachineLimits, RunStatus, StepKind
from detectbench.core.machine import Core, diff_state, run
from detectbench.errors import StateMismatchError

MASK = (1 << 64) - 1


def run_source(source, limits, **kwargs):
    program = assemble(source, registers=limits.registers, memory_words=limits.memory_words)
    return program, run(program, limits, **kwargs)


def test_alu_wraps_at_64_bits(micro_limits):
    _, result = run_source("""
        LOADI r1, -1
        ADD   r2, r1, 1
        SUB   r3, r0, 1
        MUL   r4, r1, r1
        SHL   r5, r1, 63
        SHR   r6, r1, 60
        HALT
    """, micro_limits)
    regs = result.final_state.regs
    assert regs[1] == MASK
    assert regs[2] == 0
    assert regs[3] == MASK
    assert regs[4] == 1
    assert regs[5] == 1 << 63
    assert regs[6] == 0xF


def test_shift_amount_uses_low_six_bits(micro_limits):
    _, result = run_source("LOADI r1, 5\nSHL r2, r1, 64\nHALT", micro_limits)
    assert result.final_state.regs[2] == 5


def test_blt_compares_signed(micro_limits):
    _, result = run_source("""
        LOADI r1, -1
        LOADI r2, 1
        BLT   r1, r2, yes
        HALT
    yes: LOADI r3, 7
        HALT
    """, micro_limits)
    assert result.final_state.regs[3] == 7


def test_halt_commits_and_counts_a_cycle(micro_limits):
    _, result = run_source("LOADI r1, 5\nHALT", micro_limits)
    assert result.status is RunStatus.HALTED
    assert (result.cycles, result.commits) == (2, 2)


def test_running_off_the_end_halts_without_a_cycle(micro_limits):
    _, result = run_source("LOADI r1, 5", micro_limits)
    assert result.status is RunStatus.HALTED
    assert (result.cycles, result.commits) == (1, 1)


@pytest.mark.parametrize("source, reason", [
    ("LOADI r1, 64\nLOAD r2, r1, 0", CrashReason.OUT_OF_BOUNDS_LOAD),
    ("LOADI r1, 60\nSTORE r1, r1, 4", CrashReason.OUT_OF_BOUNDS_STORE),
    ("LOADI r1, 9\nDIVU r2, r1, r0", CrashReason.DIVIDE_BY_ZERO),
])
def test_crashes(micro_limits, source, reason):
    _, result = run_source(source, micro_limits)
    assert result.status is RunStatus.CRASHED
    assert result.crash_reason is reason
    assert result.cycles == 2
    assert result.commits == 1


def test_divu_is_unsigned(micro_limits):
    _, result = run_source("LOADI r1, -2\nDIVU r2, r1, 2\nHALT", micro_limits)
    assert result.final_state.regs[2] == (MASK - 1) // 2


def test_infinite_loop_times_out():
    limits = MachineLimits(registers=8, memory_words=64, max_cycles=100)
    _, result = run_source("loop: JUMP loop", limits)
    assert result.status is RunStatus.TIMED_OUT
    assert result.cycles == 100


def test_step_on_finished_core_is_an_error(micro_limits):
    program = assemble("HALT", registers=8, memory_words=64)
    core = Core(program, micro_limits)
    assert core.step().kind is StepKind.COMMITTED
    with pytest.raises(RuntimeError):
        core.step()


def test_trace_records_every_commit(micro_limits):
    _, result = run_source("LOADI r1, 4\nSTORE r1, r1, 2\nBEQ r0, r0, 3\nHALT", micro_limits, trace=True)
    assert [r.seq for r in result.trace] == [0, 1, 2, 3]
    assert [r.cycle for r in result.trace] == [1, 2, 3, 4]
    assert result.trace[1].result == (6, 4)
    assert result.trace[2].result == (1, 3)
    assert result.trace[3].result == ()


def test_run_is_deterministic(limits, load_benchmark):
    program = load_benchmark("qsort")
    first = run(program, limits, trace=True)
    second = run(program, limits, trace=True)
    assert first.output == second.output
    assert first.trace == second.trace


def test_memory_stores_reach_output(micro_limits):
    program, result = run_source("LOADI r1, 42\nSTORE r1, r0, 10\nHALT\n.output 10 2", micro_limits)
    assert result.output == (42).to_bytes(8, "little") + bytes(8)


def test_diff_state_reports_registers_and_pc():
    a = ArchState(pc=3, regs=(0, 1, 2))
    b = ArchState(pc=4, regs=(0, 9, 2))
    assert diff_state(a, b) == [(1, 1, 9), (PC_INDEX, 3, 4)]
    assert diff_state(a, a) == []


def test_diff_state_rejects_unequal_register_files():
    with pytest.raises(StateMismatchError):
        diff_state(ArchState(0, (0, 0)), ArchState(0, (0, 0, 0)))


def test_core_rejects_state_of_wrong_size(micro_limits):
    program = assemble("HALT", registers=8)
    with pytest.raises(StateMismatchError):
        Core(program, micro_limits, state=ArchState(0, (0,) * 4))
