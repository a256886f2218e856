"""
Statistical fault-injection campaign planning.
"""

import logging
import math
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.stats import norm

from ..config import (
    CONFIDENCE_LEVEL,
    DEFAULT_KIND_MIX,
    INJECT_MEAN_FRACTION,
    INJECT_STDDEV_FRACTION,
    REGISTER_COUNT,
    WORD_BITS,
)
from ..errors import CampaignError
from .faults import FaultKind, FaultSpec

logger = logging.getLogger(__name__)


class CampaignPlan(BaseModel):
    """Immutable list of faults replayed identically under every scheme."""
    model_config = ConfigDict(frozen=True)

    seed: int
    benchmark: str = ""
    golden_cycles: int
    registers: int = REGISTER_COUNT
    kind_mix: float = DEFAULT_KIND_MIX
    inject_mean: float
    inject_stddev: float
    faults: List[FaultSpec]
    scheme_matrix: List[Dict[str, Any]] = []

    def transient(self) -> List[FaultSpec]:
        return [f for f in self.faults if not f.kind.is_permanent]

    def permanent(self) -> List[FaultSpec]:
        return [f for f in self.faults if f.kind.is_permanent]


def plan_campaign(
    n: int,
    seed: int,
    golden_cycles: int,
    kind_mix: float = DEFAULT_KIND_MIX,
    registers: int = REGISTER_COUNT,
    inject_mean: Optional[float] = None,
    inject_stddev: Optional[float] = None,
    benchmark: str = "",
    scheme_matrix: Optional[List[Dict[str, Any]]] = None,
) -> CampaignPlan:
    """
    Draw ``n`` faults for one benchmark.

    Register and bit are uniform; the injection cycle is normal around the
    middle of the golden run, clamped to ``[0, golden_cycles)``. Stuck-at
    faults are split between stuck-at-0 and stuck-at-1 uniformly.

    Args:
        n: Number of faults
        seed: Campaign seed; the plan is a pure function of the arguments
        golden_cycles: Length of the fault-free reference run
        kind_mix: Fraction of transient faults
        registers: Register-file size
        inject_mean: Mean injection cycle (default golden_cycles / 2)
        inject_stddev: Injection-cycle standard deviation (default golden_cycles / 6)
        benchmark: Benchmark name recorded in the plan
        scheme_matrix: Scheme configuration blocks the plan is replayed under

    Returns:
        CampaignPlan with exactly ``n`` faults, ids ``0..n-1``
    """
    if n < 1:
        raise CampaignError("a campaign needs at least one fault")
    if golden_cycles < 1:
        raise CampaignError("golden run must take at least one cycle")
    if not 0.0 <= kind_mix <= 1.0:
        raise CampaignError(f"kind_mix must lie in [0, 1], got {kind_mix}")

    mean = golden_cycles * INJECT_MEAN_FRACTION if inject_mean is None else inject_mean
    stddev = golden_cycles * INJECT_STDDEV_FRACTION if inject_stddev is None else inject_stddev

    rng = np.random.default_rng(seed)
    n_transient = int(math.floor(n * kind_mix + 0.5))
    stuck = rng.integers(0, 2, size=n - n_transient)
    kinds = [FaultKind.TRANSIENT_FLIP] * n_transient + [
        FaultKind.STUCK_AT_1 if s else FaultKind.STUCK_AT_0 for s in stuck
    ]
    order = rng.permutation(n)
    regs = rng.integers(0, registers, size=n)
    bits = rng.integers(0, WORD_BITS, size=n)
    cycles = np.clip(np.rint(rng.normal(mean, stddev, size=n)), 0, golden_cycles - 1).astype(np.int64)

    faults = [
        FaultSpec(
            kind=kinds[int(order[i])],
            reg=int(regs[i]),
            bit=int(bits[i]),
            inject_cycle=int(cycles[i]),
            id=i,
        )
        for i in range(n)
    ]
    logger.info(f"Planned {n} faults for {benchmark or 'benchmark'} "
                f"({n_transient} transient, {n - n_transient} stuck-at), seed {seed}")
    return CampaignPlan(
        seed=seed,
        benchmark=benchmark,
        golden_cycles=golden_cycles,
        registers=registers,
        kind_mix=kind_mix,
        inject_mean=float(mean),
        inject_stddev=float(stddev),
        faults=faults,
        scheme_matrix=list(scheme_matrix or []),
    )


def margin_of_error(n: int, confidence: float = CONFIDENCE_LEVEL, p: float = 0.5) -> float:
    """
    Half-width of the normal-approximation confidence interval of a proportion.

    Args:
        n: Sample count
        confidence: Two-sided confidence level, e.g. 0.95
        p: Assumed proportion; 0.5 is the worst case

    Returns:
        z * sqrt(p * (1 - p) / n)
    """
    if n < 1:
        raise CampaignError("margin of error needs n >= 1")
    if not 0.0 < confidence < 1.0:
        raise CampaignError(f"confidence must lie in (0, 1), got {confidence}")
    if not 0.0 < p < 1.0:
        raise CampaignError(f"p must lie in (0, 1), got {p}")
    z = float(norm.ppf(0.5 + confidence / 2.0))
    return z * math.sqrt(p * (1.0 - p) / n)
