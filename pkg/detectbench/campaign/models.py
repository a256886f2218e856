"""
Experiment configuration and report data models.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..config import (
    BENCHMARKS_DIR,
    DEFAULT_FAULTS,
    DEFAULT_KIND_MIX,
    SEED,
    WORKERS,
)
from ..core.isa import MachineLimits
from ..errors import ConfigError
from ..injection.faults import FaultSpec
from ..metrics.classification import EfficiencyBreakdown, Outcome
from ..metrics.cost_model import PowerParams
from ..metrics.statistics import DistributionSummary
from ..schemes.configs import DmrConfig, PardetConfig, RsmtConfig, SchemeConfig
from ..schemes.pardet import CheckerStats

logger = logging.getLogger(__name__)

BUNDLED_BENCHMARKS = ["qsort", "matmul", "crc32", "strsearch", "dijkstra-small", "fir-filter"]


def _default_schemes() -> List[SchemeConfig]:
    return [DmrConfig(), RsmtConfig(), PardetConfig()]


class ExperimentConfig(BaseModel):
    """One campaign: benchmarks x schemes x planned faults."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    benchmarks: List[str] = Field(default_factory=lambda: list(BUNDLED_BENCHMARKS), min_length=1)
    schemes: List[SchemeConfig] = Field(default_factory=_default_schemes, min_length=1)
    n_faults: int = Field(default=DEFAULT_FAULTS, ge=1)
    seed: int = SEED
    kind_mix: float = Field(default=DEFAULT_KIND_MIX, ge=0.0, le=1.0)
    limits: MachineLimits = Field(default_factory=MachineLimits)
    workers: int = Field(default=WORKERS, ge=1)
    output_dir: str = "results"
    inject_mean: Optional[float] = Field(default=None, ge=0.0)
    inject_stddev: Optional[float] = Field(default=None, gt=0.0)
    power: PowerParams = Field(default_factory=PowerParams)

    @model_validator(mode="after")
    def _unique_scheme_labels(self):
        labels = [s.label() for s in self.schemes]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise ValueError(f"schemes listed more than once: {duplicates}")
        return self

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ConfigError(f"invalid experiment configuration:\n{e}") from None

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentConfig":
        """
        Load a JSON experiment file; DETECTBENCH_SEED and DETECTBENCH_WORKERS override it.
        """
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: not valid JSON ({e})") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        return cls.from_dict(apply_env_overrides(data))

    def with_overrides(self, **changes: Any) -> "ExperimentConfig":
        """Copy with the non-None keyword arguments replaced, re-validated."""
        data = self.model_dump()
        data.update({k: v for k, v in changes.items() if v is not None})
        return ExperimentConfig.from_dict(data)

    def resolve_benchmarks(self) -> List[Path]:
        """Benchmark source files, looked up as given and then among the bundled kernels."""
        return [resolve_benchmark(name) for name in self.benchmarks]

    def report_dict(self) -> Dict[str, Any]:
        """Configuration as recorded in reports; parallelism and output location do not affect results."""
        return self.model_dump(mode="json", exclude={"workers", "output_dir"})


def apply_env_overrides(data: Dict[str, Any]) -> Dict[str, Any]:
    data = dict(data)
    for key, var in (("seed", "DETECTBENCH_SEED"), ("workers", "DETECTBENCH_WORKERS")):
        value = os.getenv(var)
        if value:
            try:
                data[key] = int(value)
            except ValueError:
                raise ConfigError(f"{var} must be an integer, got '{value}'") from None
    return data


def resolve_benchmark(name: str) -> Path:
    candidates = [Path(name), BENCHMARKS_DIR / name, BENCHMARKS_DIR / f"{name}.asm"]
    for candidate in candidates:
        if candidate.is_file():
            return candidate
    raise ConfigError(f"benchmark not found: {name}")


class SchemeReport(BaseModel):
    """Everything measured for one (benchmark, scheme) pair."""
    model_config = ConfigDict(frozen=True)

    benchmark: str
    scheme: str
    config: Dict[str, Any]
    efficiency: Dict[str, EfficiencyBreakdown]
    latency: Optional[DistributionSummary] = None
    manifest_latency: Optional[DistributionSummary] = None
    cycles: int
    commits: int
    ipc: float
    slowdown: float
    verified_cycle: int
    area_overhead: float
    power_overhead: float
    energy_overhead: float
    slack_insns: Optional[DistributionSummary] = None
    slack_cycles: Optional[DistributionSummary] = None
    checker_stats: Optional[CheckerStats] = None
    outcomes: List[Outcome] = []


class BenchmarkInfo(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    golden_cycles: int
    golden_commits: int
    output_words: int
    seed: int
    faults: List[FaultSpec]


class CampaignReport(BaseModel):
    """Result of one campaign; a pure function of the experiment configuration."""
    model_config = ConfigDict(frozen=True)

    config: Dict[str, Any]
    benchmarks: List[BenchmarkInfo]
    schemes: List[SchemeReport]
    violations: List[str] = []

    def get(self, benchmark: str, scheme: str) -> SchemeReport:
        for report in self.schemes:
            if report.benchmark == benchmark and report.scheme == scheme:
                return report
        raise KeyError(f"{benchmark}/{scheme}")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "CampaignReport":
        try:
            return cls.model_validate_json(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"report not found: {path}") from None
        except ValidationError as e:
            raise ConfigError(f"{path}: not a campaign report ({e.error_count()} errors)") from None


class EventRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    cycle: int
    seq: int
    cause: str
    detail: str = ""


class SingleRunReport(BaseModel):
    """One run of one benchmark under one scheme, optionally faulted."""
    model_config = ConfigDict(frozen=True)

    benchmark: str
    scheme: str
    config: Dict[str, Any]
    fault: Optional[str] = None
    status: str
    cycles: int
    commits: int
    ipc: float
    slowdown: float
    verified_cycle: int
    crash_reason: Optional[str] = None
    events: List[EventRecord] = []
    outcome: Optional[Outcome] = None
