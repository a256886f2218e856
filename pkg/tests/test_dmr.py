import pytest

from detectbench.campaign.engine import golden_run
from detectbench.campaign.models import BUNDLED_BENCHMARKS
from detectbench.core.assembler import assemble
from detectbench.core.isa import CrashReason
from detectbench.injection.faults import parse_fault
from detectbench.injection.planner import plan_campaign
from detectbench.metrics.classification import OutcomeClass, classify
from detectbench.schemes.base_scheme import DetectionCause, SchemeStatus
from detectbench.schemes.dmr import DmrScheme, run_dmr


@pytest.mark.parametrize("name", BUNDLED_BENCHMARKS)
def test_fault_free_dmr_matches_golden_at_full_speed(limits, load_benchmark, name):
    program = load_benchmark(name)
    golden = golden_run(program, limits)
    result = run_dmr(program, limits)
    assert result.status is SchemeStatus.HALTED
    assert result.output == golden.output
    assert result.cycles == golden.cycles
    assert result.events == []
    assert [a.commits for a in result.activity] == [golden.commits, golden.commits]


def test_mismatch_detected_in_the_same_cycle(store_chain, micro_limits):
    result = run_dmr(store_chain, micro_limits, parse_fault("transient:r1:4:3"))
    assert result.status is SchemeStatus.DETECTED
    event = result.events[0]
    assert (event.cycle, event.seq) == (3, 2)
    assert event.cause is DetectionCause.RESULT_MISMATCH
    assert result.output == b""


def test_fault_in_unused_register_is_masked(store_chain, micro_limits):
    baseline = run_dmr(store_chain, micro_limits)
    result = run_dmr(store_chain, micro_limits, parse_fault("sa1:r7:0:0"))
    assert result.status is SchemeStatus.HALTED
    assert classify(baseline, result).outcome is OutcomeClass.MASKED


def test_main_core_crash_ends_the_run(micro_limits):
    program = assemble("LOADI r1, 5\nLOAD r2, r1, 0\nHALT", registers=8, memory_words=64)
    result = run_dmr(program, micro_limits, parse_fault("transient:r1:40:2"))
    assert result.status is SchemeStatus.CRASHED
    assert result.crash_reason is CrashReason.OUT_OF_BOUNDS_LOAD
    assert result.cycles == 2


def test_describe():
    assert DmrScheme(None, None).describe() == {"scheme": "dmr"}


def test_dmr_never_lets_corruption_through(limits, load_benchmark):
    program = load_benchmark("crc32")
    baseline = run_dmr(program, limits)
    run_limits = limits.model_copy(update={"max_cycles": 3 * baseline.cycles + 1})
    plan = plan_campaign(40, seed=21, golden_cycles=baseline.cycles)
    scheme = DmrScheme(program, run_limits)
    outcomes = [classify(baseline, scheme.run(fault)).outcome for fault in plan.faults]
    assert OutcomeClass.SDC not in outcomes
    assert OutcomeClass.DETECTED in outcomes
