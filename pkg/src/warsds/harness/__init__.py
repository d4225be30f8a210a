"""Calibration simulations, metrics and result files."""

from .config import ExperimentConfig, config_from_dict, config_to_dict, dump_config, load_config
from .metrics import aupc, bca
from .simulate import (
    RunResult,
    SweepRow,
    labeled_indices,
    sensitivity_sweep,
    simulate,
    simulate_offline,
    simulate_online,
)
