"""Error-detection schemes: unprotected, DMR, R-SMT and ParDet."""

from ..core.isa import MachineLimits, Program
from ..errors import ConfigError
from .base_scheme import BaseScheme
from .configs import DmrConfig, PardetConfig, RsmtConfig, SchemeConfig, UnprotectedConfig
from .dmr import DmrScheme
from .pardet import PardetScheme
from .rsmt import RsmtScheme
from .unprotected import UnprotectedScheme


def create_scheme(config: SchemeConfig, program: Program, limits: MachineLimits) -> BaseScheme:
    """Build the scheme a configuration block describes."""
    if isinstance(config, UnprotectedConfig):
        return UnprotectedScheme(program, limits)
    if isinstance(config, DmrConfig):
        return DmrScheme(program, limits)
    if isinstance(config, RsmtConfig):
        return RsmtScheme(program, limits, config.buffer_capacity, config.commit_width, config.policy)
    if isinstance(config, PardetConfig):
        return PardetScheme(program, limits, config.n_checkers, config.segment_insns, config.speed_ratio,
                            config.checkpoint_cost, config.log_entries_per_segment)
    raise ConfigError(f"unknown scheme configuration: {config!r}")
