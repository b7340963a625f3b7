from .config import (
    EvalConfig,
    FitInstruction,
    ScenarioConfig,
    config_from_dict,
    load_config,
    log_grid,
)
from .csvio import read_csv, write_csv, write_report_csv
from .runner import SweepRecord, SweepResult, resolve_predictor, run_scenario
from .svg import emit_plot

__all__ = [
    "EvalConfig",
    "FitInstruction",
    "ScenarioConfig",
    "SweepRecord",
    "SweepResult",
    "config_from_dict",
    "emit_plot",
    "load_config",
    "log_grid",
    "read_csv",
    "resolve_predictor",
    "run_scenario",
    "write_csv",
    "write_report_csv",
]
