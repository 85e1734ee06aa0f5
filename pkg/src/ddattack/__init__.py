"""Data-driven attack detection for discrete-time LTI systems from output data."""

from .attacks import AttackScenario, check_early_detectability, check_undetectable, synthesize_undetectable
from .features import (
    FeatureBasis,
    FeatureDynamics,
    assemble_shifted_pair,
    data_feature_basis,
    feature_sequence,
    fit_feature_dynamics,
    model_feature_basis,
    model_feature_dynamics,
)
from .hankel import HankelMatrix, build_hankel, hankel_information, rank_curve
from .indices import (
    IndexReport,
    excitability_index,
    excitability_index_at,
    heuristic_window,
    index_report,
    observability_index,
    safe_horizon_heuristic,
)
from .linsys import LtiSystem, companion_system, input_coupling_matrix, observability_matrix, simulate, windowed_output
from .monitor import DetectionReport, MonitorConfig, MonitorState, Verdict, run_monitor
from .numerics import RankTolerance, least_squares_propagator, numerical_rank, pseudoinverse, range_basis

__version__ = "0.1.0"

__all__ = [
    "AttackScenario",
    "DetectionReport",
    "FeatureBasis",
    "FeatureDynamics",
    "HankelMatrix",
    "IndexReport",
    "LtiSystem",
    "MonitorConfig",
    "MonitorState",
    "RankTolerance",
    "Verdict",
    "assemble_shifted_pair",
    "build_hankel",
    "check_early_detectability",
    "check_undetectable",
    "companion_system",
    "data_feature_basis",
    "excitability_index",
    "excitability_index_at",
    "feature_sequence",
    "fit_feature_dynamics",
    "hankel_information",
    "heuristic_window",
    "index_report",
    "input_coupling_matrix",
    "least_squares_propagator",
    "model_feature_basis",
    "model_feature_dynamics",
    "numerical_rank",
    "observability_index",
    "observability_matrix",
    "pseudoinverse",
    "range_basis",
    "rank_curve",
    "run_monitor",
    "safe_horizon_heuristic",
    "simulate",
    "synthesize_undetectable",
    "windowed_output",
]
