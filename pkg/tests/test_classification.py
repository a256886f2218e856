import pytest
from pydantic import ValidationError

from detectbench.errors import CampaignError, GoldenRunError
from detectbench.injection.faults import parse_fault
from detectbench.metrics.classification import (
    OUTCOME_ORDER,
    Outcome,
    OutcomeClass,
    aggregate,
    aggregate_by_kind,
    classify,
    latency_stats,
)
from detectbench.schemes.base_scheme import DetectionCause, DetectionEvent, SchemeRunResult, SchemeStatus

FAULT = parse_fault("transient:r3:1:40", fault_id=9)


def golden():
    return SchemeRunResult(scheme="none", status=SchemeStatus.HALTED, cycles=100, commits=100, output=b"ok")


def faulty(status=SchemeStatus.HALTED, cycles=100, output=b"ok", events=(), manifest_cycle=None):
    return SchemeRunResult(scheme="dmr", status=status, cycles=cycles, commits=cycles, output=output,
                           events=list(events), fault=FAULT, manifest_cycle=manifest_cycle)


def detection(cycle):
    return DetectionEvent(cycle=cycle, seq=0, cause=DetectionCause.RESULT_MISMATCH)


@pytest.mark.parametrize("run, expected", [
    (faulty(), OutcomeClass.MASKED),
    (faulty(output=b"no"), OutcomeClass.SDC),
    (faulty(status=SchemeStatus.CRASHED, output=b""), OutcomeClass.CRASH),
    (faulty(status=SchemeStatus.TIMED_OUT, cycles=301, output=b""), OutcomeClass.HANG),
    (faulty(cycles=301), OutcomeClass.HANG),
    (faulty(cycles=300), OutcomeClass.MASKED),
    (faulty(cycles=301, output=b"no"), OutcomeClass.HANG),
])
def test_classify(run, expected):
    outcome = classify(golden(), run, hang_multiplier=3.0)
    assert outcome.outcome is expected
    assert outcome.fault_id == 9
    assert outcome.latency_cycles is None


def test_detection_preempts_everything_else():
    run = faulty(status=SchemeStatus.CRASHED, output=b"", events=[detection(55), detection(70)], manifest_cycle=50)
    outcome = classify(golden(), run)
    assert outcome.outcome is OutcomeClass.DETECTED
    assert outcome.latency_cycles == 15
    assert outcome.manifest_latency_cycles == 5
    assert outcome.family == "transient"


def test_reference_run_must_halt():
    reference = SchemeRunResult(scheme="none", status=SchemeStatus.TIMED_OUT, cycles=100, commits=1)
    with pytest.raises(GoldenRunError):
        classify(reference, faulty())


def test_latency_only_on_detected_outcomes():
    with pytest.raises(ValidationError):
        Outcome(fault_id=0, outcome=OutcomeClass.DETECTED)
    with pytest.raises(ValidationError):
        Outcome(fault_id=0, outcome=OutcomeClass.MASKED, latency_cycles=3)


def outcomes(*classes, kind="transient"):
    spec = parse_fault(f"{kind}:r1:0:0")
    return [
        Outcome(fault_id=i, fault_kind=spec.kind, outcome=cls,
                latency_cycles=10 * (i + 1) if cls is OutcomeClass.DETECTED else None)
        for i, cls in enumerate(classes)
    ]


def test_aggregate():
    group = outcomes(OutcomeClass.DETECTED, OutcomeClass.DETECTED, OutcomeClass.MASKED, OutcomeClass.SDC)
    breakdown = aggregate(group)
    assert breakdown.n == 4
    assert breakdown.counts[OutcomeClass.DETECTED] == 2
    assert breakdown.fraction(OutcomeClass.DETECTED) == 0.5
    assert breakdown.fraction(OutcomeClass.HANG) == 0.0
    assert sum(breakdown.fractions[c] for c in OUTCOME_ORDER) == pytest.approx(1.0)
    assert breakdown.failures == 0.25
    assert breakdown.margin == pytest.approx(0.49, abs=0.01)
    with pytest.raises(CampaignError):
        aggregate([])


def test_aggregate_by_kind():
    mixed = outcomes(OutcomeClass.MASKED, OutcomeClass.DETECTED) + outcomes(OutcomeClass.CRASH, kind="sa0")
    groups = aggregate_by_kind(mixed)
    assert set(groups) == {"transient", "permanent", "all"}
    assert groups["permanent"].n == 1
    assert groups["all"].n == 3
    assert set(aggregate_by_kind(outcomes(OutcomeClass.MASKED))) == {"transient", "all"}


def test_latency_stats():
    group = outcomes(OutcomeClass.DETECTED, OutcomeClass.MASKED, OutcomeClass.DETECTED)
    summary = latency_stats(group)
    assert summary.count == 2
    assert summary.mean == 20
    with pytest.raises(CampaignError):
        latency_stats(outcomes(OutcomeClass.MASKED))
    with pytest.raises(CampaignError):
        latency_stats(group, manifest=True)
