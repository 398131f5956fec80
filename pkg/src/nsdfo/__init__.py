"""Derivative-free linesearch solvers for nonsmooth optimization.

CS-DFN and its Fast-CS-DFN variant, which adds a search direction built from
a clustering estimate of the Clarke subdifferential, plus a registry of
nonsmooth test problems and performance/data-profile benchmarking.
"""

from .bench import data_profile, performance_profile, run_suite, solved_at
from .clustering import ClusterModel, SamplePair, SampleSet, assign, fit_generator, kmeans_directional
from .direction import DirectionOutcome, compute_direction
from .linesearch import LineSearchConfig, LineSearchResult, continuous_search
from .minnorm import MinNormResult, SpdMetric, min_norm_point, project_onto_simplex
from .problems import (
    BudgetExhausted,
    EvalCounter,
    ObjectiveProblem,
    evaluate_counted,
    registry_get,
    registry_names,
)
from .solver import RunRecord, SolverConfig, build_metric, dense_direction, run_csdfn, run_fast_csdfn

__version__ = "0.1.0"
