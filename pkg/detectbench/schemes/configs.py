"""
Scheme configuration blocks, as they appear in experiment JSON files.
"""

from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field

from ..config import (
    PARDET_CHECKERS,
    PARDET_CHECKPOINT_COST,
    PARDET_LOG_ENTRIES,
    PARDET_SEGMENT_INSNS,
    PARDET_SPEED_RATIO,
    RSMT_BUFFER_CAPACITY,
    RSMT_COMMIT_WIDTH,
    RSMT_POLICY,
)


class UnprotectedConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    scheme: Literal["none"] = "none"

    def label(self) -> str:
        return "none"


class DmrConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    scheme: Literal["dmr"] = "dmr"

    def label(self) -> str:
        return "dmr"


class RsmtConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    scheme: Literal["rsmt"] = "rsmt"
    buffer_capacity: int = Field(default=RSMT_BUFFER_CAPACITY, ge=1)
    commit_width: int = Field(default=RSMT_COMMIT_WIDTH, ge=1, le=2)
    policy: Literal["round_robin", "primary_first"] = RSMT_POLICY

    def label(self) -> str:
        return f"rsmt[buf={self.buffer_capacity}]"


class PardetConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    scheme: Literal["pardet"] = "pardet"
    n_checkers: int = Field(default=PARDET_CHECKERS, ge=1)
    segment_insns: int = Field(default=PARDET_SEGMENT_INSNS, ge=1)
    speed_ratio: float = Field(default=PARDET_SPEED_RATIO, gt=0.0, le=1.0)
    checkpoint_cost: int = Field(default=PARDET_CHECKPOINT_COST, ge=0)
    log_entries_per_segment: int = Field(default=PARDET_LOG_ENTRIES, ge=1)

    def label(self) -> str:
        return f"pardet[chk={self.n_checkers}]"


SchemeConfig = Annotated[
    Union[UnprotectedConfig, DmrConfig, RsmtConfig, PardetConfig],
    Field(discriminator="scheme"),
]
