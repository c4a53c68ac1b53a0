"""Dynamic set cover with bounded recourse."""

from .caching import LRUCache
from .core import TOLERANCE, at_most, approx_equal, ceil_guarded
from .core import SetSystem, UpdateKind, UpdateStep, UniverseState, CoverSolution, Finding, AuditReport
from .core import CoverageCounter, covered_by, is_cover, solution_cost, apply_update, replay
from .core import parse_instance, parse_json_instance, format_instance, format_json_instance
from .core import load_instance, save_instance
from .dynamic_algorithms import DynamicAlgorithm, RecomputeGreedy, LazyPrimalDual, LevelGreedy, top_level
from .errors import DyncoverError, ParseError, ValidationError, TraceError, InfeasibleError
from .errors import ParameterError, BudgetExhausted, ConsistencyError, AuditFailure
from .harness import GeneratorKind, AlgorithmKind, TransformKind, OracleMode
from .harness import WorkloadSpec, ExperimentConfig, ExperimentResult
from .harness import gen_random, gen_pd_adversarial, gen_bipartite_reconfig, gen_robustness_attack, generate
from .harness import run_experiment, run_batch, pd_non_robustness, naive_maintenance_check
from .harness import replay_reconfiguration, solve_static
from .recourse_transform import TransformMode, Phase, StepReport, Pipeline, Passthrough, RecourseTransform, wrap
from .static_solvers import DEFAULT_NODE_BUDGET, ORACLE_MAX_SETS, harmonic
from .static_solvers import ChargeVector, DualVector, PDMode, RobustnessReport
from .static_solvers import greedy_cover, charge_audit, primal_dual_cover, dual_lower_bound
from .static_solvers import ExactCoverSearch, exact_cover, robustness_check
from .timing import get_msec, get_nsec, Stopwatch, InterruptibleAlgorithm


__all__ = [
    'LRUCache',
    'TOLERANCE', 'at_most', 'approx_equal', 'ceil_guarded',
    'SetSystem', 'UpdateKind', 'UpdateStep', 'UniverseState', 'CoverSolution', 'Finding', 'AuditReport',
    'CoverageCounter', 'covered_by', 'is_cover', 'solution_cost', 'apply_update', 'replay',
    'parse_instance', 'parse_json_instance', 'format_instance', 'format_json_instance',
    'load_instance', 'save_instance',
    'DynamicAlgorithm', 'RecomputeGreedy', 'LazyPrimalDual', 'LevelGreedy', 'top_level',
    'DyncoverError', 'ParseError', 'ValidationError', 'TraceError', 'InfeasibleError',
    'ParameterError', 'BudgetExhausted', 'ConsistencyError', 'AuditFailure',
    'GeneratorKind', 'AlgorithmKind', 'TransformKind', 'OracleMode',
    'WorkloadSpec', 'ExperimentConfig', 'ExperimentResult',
    'gen_random', 'gen_pd_adversarial', 'gen_bipartite_reconfig', 'gen_robustness_attack', 'generate',
    'run_experiment', 'run_batch', 'pd_non_robustness', 'naive_maintenance_check',
    'replay_reconfiguration', 'solve_static',
    'TransformMode', 'Phase', 'StepReport', 'Pipeline', 'Passthrough', 'RecourseTransform', 'wrap',
    'DEFAULT_NODE_BUDGET', 'ORACLE_MAX_SETS', 'harmonic',
    'ChargeVector', 'DualVector', 'PDMode', 'RobustnessReport',
    'greedy_cover', 'charge_audit', 'primal_dual_cover', 'dual_lower_bound',
    'ExactCoverSearch', 'exact_cover', 'robustness_check',
    'get_msec', 'get_nsec', 'Stopwatch', 'InterruptibleAlgorithm',
]
