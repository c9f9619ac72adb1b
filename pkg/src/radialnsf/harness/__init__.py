"""Scenario configuration, runs, manufactured solutions, sweeps and the CLI."""

from .config import ConfigError, ScenarioConfig, from_dict, load_config
from .mms import run_mms
from .output import check_identities, read_timeseries, write_outputs
from .runner import RunOutput, run_simulation
from .sweep import run_sweep

__all__ = [
    "ConfigError",
    "RunOutput",
    "ScenarioConfig",
    "check_identities",
    "from_dict",
    "load_config",
    "read_timeseries",
    "run_mms",
    "run_simulation",
    "run_sweep",
    "write_outputs",
]
