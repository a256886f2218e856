"""
Injection outcome classification and aggregation.
"""

from enum import Enum
import logging
from typing import Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, model_validator

from ..config import CONFIDENCE_LEVEL, HANG_MULTIPLIER
from ..core.isa import RunResult
from ..errors import CampaignError, GoldenRunError
from ..injection.faults import FaultKind
from ..injection.planner import margin_of_error
from ..schemes.base_scheme import SchemeRunResult, SchemeStatus
from .statistics import DistributionSummary, summarize

logger = logging.getLogger(__name__)


class OutcomeClass(str, Enum):
    DETECTED = "detected"
    MASKED = "masked"
    SDC = "sdc"
    CRASH = "crash"
    HANG = "hang"


# Report column order
OUTCOME_ORDER = (OutcomeClass.DETECTED, OutcomeClass.MASKED, OutcomeClass.SDC,
                 OutcomeClass.CRASH, OutcomeClass.HANG)


class Outcome(BaseModel):
    """Classified result of one injection."""
    model_config = ConfigDict(frozen=True)

    fault_id: int
    fault_kind: Optional[FaultKind] = None
    outcome: OutcomeClass
    latency_cycles: Optional[int] = None
    manifest_latency_cycles: Optional[int] = None

    @model_validator(mode="after")
    def _latency_iff_detected(self):
        if (self.latency_cycles is not None) != (self.outcome is OutcomeClass.DETECTED):
            raise ValueError("latency_cycles must be set exactly for detected outcomes")
        return self

    @property
    def family(self) -> str:
        return self.fault_kind.family if self.fault_kind is not None else "none"


class EfficiencyBreakdown(BaseModel):
    """Per-class outcome fractions of one group of injections."""
    model_config = ConfigDict(frozen=True)

    kind: str = "all"
    n: int
    counts: Dict[OutcomeClass, int]
    fractions: Dict[OutcomeClass, float]
    margin: float

    def fraction(self, outcome: OutcomeClass) -> float:
        return self.fractions.get(outcome, 0.0)

    @property
    def failures(self) -> float:
        """Fraction of crashes, hangs and silent corruptions."""
        return self.fraction(OutcomeClass.SDC) + self.fraction(OutcomeClass.CRASH) + self.fraction(OutcomeClass.HANG)


def classify(
    golden: Union[RunResult, SchemeRunResult],
    run: SchemeRunResult,
    hang_multiplier: float = HANG_MULTIPLIER,
) -> Outcome:
    """
    Classify one faulty run against its fault-free reference.

    Precedence is Detected, Crash, Hang, SDC, Masked: a detection preempts
    whatever the run would have done afterwards.

    Args:
        golden: Fault-free run of the same design; must have halted
        run: Faulty run
        hang_multiplier: A run longer than this many golden runs is a hang

    Returns:
        Outcome
    """
    if golden.status.value != "halted":
        raise GoldenRunError(f"reference run did not halt ({golden.status.value})")

    fault = run.fault
    fault_id = fault.id if fault is not None else 0
    kind = fault.kind if fault is not None else None

    if run.events:
        first = run.events[0].cycle
        inject = fault.inject_cycle if fault is not None else 0
        manifest = first - run.manifest_cycle if run.manifest_cycle is not None else None
        return Outcome(fault_id=fault_id, fault_kind=kind, outcome=OutcomeClass.DETECTED,
                       latency_cycles=first - inject, manifest_latency_cycles=manifest)

    if run.status is SchemeStatus.CRASHED:
        cls = OutcomeClass.CRASH
    elif run.status is SchemeStatus.TIMED_OUT or run.cycles > hang_multiplier * golden.cycles:
        cls = OutcomeClass.HANG
    elif run.output != golden.output:
        cls = OutcomeClass.SDC
    else:
        cls = OutcomeClass.MASKED
    return Outcome(fault_id=fault_id, fault_kind=kind, outcome=cls)


def aggregate(outcomes: List[Outcome], kind: str = "all", confidence: float = CONFIDENCE_LEVEL) -> EfficiencyBreakdown:
    """
    Outcome fractions over a non-empty list of outcomes.

    Args:
        outcomes: Classified injections
        kind: Label of the group (``transient``, ``permanent`` or ``all``)
        confidence: Confidence level of the attached margin

    Returns:
        EfficiencyBreakdown whose fractions sum to one
    """
    if not outcomes:
        raise CampaignError("cannot aggregate an empty outcome list")
    n = len(outcomes)
    counts = {cls: 0 for cls in OUTCOME_ORDER}
    for outcome in outcomes:
        counts[outcome.outcome] += 1
    fractions = {cls: counts[cls] / n for cls in OUTCOME_ORDER}
    return EfficiencyBreakdown(kind=kind, n=n, counts=counts, fractions=fractions,
                               margin=margin_of_error(n, confidence, 0.5))


def aggregate_by_kind(outcomes: List[Outcome]) -> Dict[str, EfficiencyBreakdown]:
    """Breakdowns for transient faults, permanent faults and both; empty groups are omitted."""
    groups = {
        "transient": [o for o in outcomes if o.family == "transient"],
        "permanent": [o for o in outcomes if o.family == "permanent"],
        "all": list(outcomes),
    }
    return {kind: aggregate(group, kind) for kind, group in groups.items() if group}


def latency_stats(outcomes: List[Outcome], manifest: bool = False) -> DistributionSummary:
    """
    Detection-latency distribution over the detected outcomes.

    Args:
        outcomes: Classified injections, any classes
        manifest: Measure from first corrupted read instead of injection

    Returns:
        DistributionSummary of latency in cycles
    """
    if manifest:
        latencies = [o.manifest_latency_cycles for o in outcomes
                     if o.outcome is OutcomeClass.DETECTED and o.manifest_latency_cycles is not None]
    else:
        latencies = [o.latency_cycles for o in outcomes if o.outcome is OutcomeClass.DETECTED]
    if not latencies:
        raise CampaignError("no detected outcomes to compute latency over")
    return summarize(latencies)
