"""Performative predictors, concept shift and fairness: a simulation lab.

Monte Carlo simulation of a decision-dependent population alongside exact,
enumeration-based values of every group metric, so the two can be checked
against each other.
"""
from .exceptions import (
    ConfigError,
    DomainError,
    EmptySampleError,
    FitError,
    PartitionMismatchError,
    PFLError,
)
from .metrics import (
    CriterionResult,
    GroupMetrics,
    MetricReport,
    check_criterion,
    disparity,
    empirical_metrics,
)
from .oracle import OracleContext
from .policy import DecisionPolicy, Intervention, baseline_policy, decide, intervene, odds_multiply
from .population import (
    Cell,
    CellTable,
    Individual,
    PopulationSpec,
    Sample,
    build_example_population,
    observe,
    sample_individuals,
)
from .predictor import PluginPredictor, ThresholdPredictor, fit_plugin, partition_on, predict

__version__ = "0.1.0"

__all__ = [
    "baseline_policy",
    "build_example_population",
    "Cell",
    "CellTable",
    "check_criterion",
    "ConfigError",
    "CriterionResult",
    "decide",
    "DecisionPolicy",
    "disparity",
    "DomainError",
    "empirical_metrics",
    "EmptySampleError",
    "fit_plugin",
    "FitError",
    "GroupMetrics",
    "Individual",
    "intervene",
    "Intervention",
    "MetricReport",
    "observe",
    "odds_multiply",
    "OracleContext",
    "partition_on",
    "PartitionMismatchError",
    "PFLError",
    "PluginPredictor",
    "PopulationSpec",
    "predict",
    "Sample",
    "sample_individuals",
    "ThresholdPredictor",
]
