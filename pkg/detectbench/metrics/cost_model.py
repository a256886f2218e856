"""
Analytic area and activity-based power models.

Both report overheads relative to the unprotected core. Area is a constant
table extrapolated linearly in buffer capacity and checker count. Power
charges every active core a static cost per active cycle and a dynamic cost
per commit, plus a shared uncore static cost over the program's runtime.
"""

from typing import Any, Dict, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter

from ..config import (
    AREA_DMR,
    AREA_PARDET_PER_3_CHECKERS,
    AREA_RSMT_BUFFER_PER_10,
    AREA_SMT_LOGIC,
    POWER_MAIN_PER_COMMIT,
    POWER_MAIN_STATIC,
    POWER_SMALL_CORE_FACTOR,
    POWER_SMT_STATIC_OVERHEAD,
    POWER_UNCORE_STATIC,
)
from ..errors import CampaignError, ConfigError
from ..schemes.base_scheme import CoreActivity, SchemeRunResult
from ..schemes.configs import DmrConfig, PardetConfig, RsmtConfig, SchemeConfig, UnprotectedConfig


class PowerParams(BaseModel):
    """Per-core-type energy parameters, in arbitrary units."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    main_static_per_cycle: float = Field(default=POWER_MAIN_STATIC, ge=0.0)
    main_energy_per_commit: float = Field(default=POWER_MAIN_PER_COMMIT, ge=0.0)
    small_core_factor: float = Field(default=POWER_SMALL_CORE_FACTOR, gt=0.0)
    uncore_static_per_cycle: float = Field(default=POWER_UNCORE_STATIC, ge=0.0)
    smt_static_overhead: float = Field(default=POWER_SMT_STATIC_OVERHEAD, ge=0.0)

    def static_per_cycle(self, kind: str) -> float:
        if kind == "checker":
            return self.main_static_per_cycle * self.small_core_factor
        if kind == "smt":
            return self.main_static_per_cycle * (1.0 + self.smt_static_overhead)
        return self.main_static_per_cycle

    def energy_per_commit(self, kind: str) -> float:
        if kind == "checker":
            return self.main_energy_per_commit * self.small_core_factor
        return self.main_energy_per_commit


def area_overhead(scheme_config: Union[BaseModel, Dict[str, Any]]) -> float:
    """
    Extra silicon area of a scheme as a fraction of the unprotected core.

    Args:
        scheme_config: Scheme configuration model or its JSON block

    Returns:
        Overhead fraction, e.g. 1.0 for DMR
    """
    if isinstance(scheme_config, dict):
        try:
            scheme_config = TypeAdapter(SchemeConfig).validate_python(scheme_config)
        except ValueError as e:
            raise ConfigError(f"unknown scheme configuration: {e}") from None

    if isinstance(scheme_config, UnprotectedConfig):
        return 0.0
    if isinstance(scheme_config, DmrConfig):
        return AREA_DMR
    if isinstance(scheme_config, RsmtConfig):
        return AREA_SMT_LOGIC + AREA_RSMT_BUFFER_PER_10 * scheme_config.buffer_capacity / 10.0
    if isinstance(scheme_config, PardetConfig):
        return AREA_PARDET_PER_3_CHECKERS * scheme_config.n_checkers / 3.0
    raise ConfigError(f"unknown scheme configuration: {scheme_config!r}")


def core_energy(activity: CoreActivity, params: PowerParams) -> float:
    return (params.static_per_cycle(activity.kind) * activity.active_cycles
            + params.energy_per_commit(activity.kind) * activity.commits)


def run_energy(run: SchemeRunResult, params: Optional[PowerParams] = None) -> float:
    """Total energy of one run: all active cores plus the uncore over the program's cycles."""
    params = params or PowerParams()
    cores = sum(core_energy(a, params) for a in run.activity)
    return cores + params.uncore_static_per_cycle * run.cycles


def energy_overhead(run: SchemeRunResult, baseline: SchemeRunResult, params: Optional[PowerParams] = None) -> float:
    """``energy(run) / energy(baseline) - 1``."""
    params = params or PowerParams()
    base = run_energy(baseline, params)
    if base <= 0.0:
        raise CampaignError("baseline energy is zero")
    return run_energy(run, params) / base - 1.0


def power_overhead(run: SchemeRunResult, baseline: SchemeRunResult, params: Optional[PowerParams] = None) -> float:
    """
    Average-power overhead of a run over the unprotected baseline.

    Average power is energy over the cycles the program occupies the main
    core, so a scheme that only runs longer does not look more power hungry.

    Args:
        run: Fault-free run of the protected design
        baseline: Fault-free run of the unprotected design
        params: Energy parameters

    Returns:
        ``power(run) / power(baseline) - 1``
    """
    params = params or PowerParams()
    base = run_energy(baseline, params)
    if base <= 0.0 or baseline.cycles <= 0:
        raise CampaignError("baseline energy is zero")
    if run.cycles <= 0:
        raise CampaignError("protected run took zero cycles")
    return (run_energy(run, params) / run.cycles) / (base / baseline.cycles) - 1.0
