"""
Distribution summaries shared by latency and slack reporting.
"""

import math
from typing import List, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..config import HISTOGRAM_BINS
from ..errors import CampaignError


class HistogramBin(BaseModel):
    """Integer bin ``[lower, upper)``."""
    model_config = ConfigDict(frozen=True)

    lower: int
    upper: int
    count: int


class DistributionSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    count: int
    min: float
    mean: float
    median: float
    max: float
    histogram: List[HistogramBin]


def integer_bins(lo: int, hi: int, bins: int = HISTOGRAM_BINS) -> np.ndarray:
    """At most ``bins`` equal-width integer bins covering ``[lo, hi]``."""
    span = hi - lo + 1
    width = max(1, math.ceil(span / bins))
    n = math.ceil(span / width)
    return lo + width * np.arange(n + 1, dtype=np.int64)


def summarize(values: Sequence[float], bins: int = HISTOGRAM_BINS) -> DistributionSummary:
    """
    Summary statistics and an integer-aligned histogram of ``values``.

    Args:
        values: Non-empty sample
        bins: Maximum number of histogram bins

    Returns:
        DistributionSummary
    """
    if len(values) == 0:
        raise CampaignError("cannot summarise an empty sample")
    data = np.asarray(values, dtype=np.float64)
    lo, hi = int(math.floor(data.min())), int(math.floor(data.max()))
    edges = integer_bins(lo, hi, bins)
    counts, _ = np.histogram(data, bins=edges)
    histogram = [
        HistogramBin(lower=int(edges[i]), upper=int(edges[i + 1]), count=int(counts[i]))
        for i in range(len(counts))
    ]
    return DistributionSummary(
        count=int(data.size),
        min=float(data.min()),
        mean=float(data.mean()),
        median=float(np.median(data)),
        max=float(data.max()),
        histogram=histogram,
    )
