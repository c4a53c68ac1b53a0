"""Workload generation, experiment orchestration, and reports."""

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from enum import Enum
from math import floor, fsum, inf as INF, isfinite, log
from pathlib import Path
from random import Random
from typing import Any, Optional, Union

from .caching import LRUCache
from .core import TOLERANCE, at_most
from .core import SetSystem, UpdateStep, UpdateKind, CoverSolution, Finding
from .core import CoverageCounter, is_cover, load_instance, covered_by
from .dynamic_algorithms import DynamicAlgorithm, LevelGreedy, LazyPrimalDual, RecomputeGreedy
from .errors import DyncoverError, ParameterError, BudgetExhausted
from .recourse_transform import Pipeline, Passthrough, StepReport, TransformMode, wrap
from .static_solvers import DEFAULT_NODE_BUDGET, ORACLE_MAX_SETS
from .static_solvers import ChargeVector, PDMode, RobustnessReport
from .static_solvers import greedy_cover, charge_audit, primal_dual_cover, exact_cover, robustness_check
from .timing import Stopwatch


LOGGER = logging.getLogger(__name__)

GENERATOR_RETRY_CAP = 16
DEFAULT_EPSILON = 0.2
ORACLE_CACHE_SIZE = 4096


class GeneratorKind(Enum):
    """The workload generators."""
    RANDOM = 'random'
    PD_ADVERSARIAL = 'pd-adversarial'
    BIPARTITE = 'bipartite'
    ROBUSTNESS_ATTACK = 'robustness-attack'


class AlgorithmKind(Enum):
    """The background algorithms."""
    LEVEL_GREEDY = 'level-greedy'
    LAZY_PD = 'lazy-pd'
    RECOMPUTE = 'recompute'


class TransformKind(Enum):
    """The wrappers around the background algorithm."""
    NONE = 'none'
    LF = 'lf'
    HF = 'hf'


class OracleMode(Enum):
    """How each step's optimum is estimated."""
    AUTO = 'auto'
    EXACT = 'exact'
    DUAL = 'dual'
    OFF = 'off'


@dataclass(frozen=True)
class WorkloadSpec:
    """Parameters of a generated instance and trace.

    n is the capacity (the most elements alive at once); the element ids
    range over num_elements, which defaults to n.
    """
    generator: GeneratorKind = GeneratorKind.RANDOM
    n: int = 16
    m: int = 12
    f: int = 3
    aspect_ratio: float = 1.0
    length: int = 500
    insert_ratio: float = 0.6
    seed: int = 0
    num_elements: Optional[int] = None
    max_set_size: Optional[int] = None
    delta: float = 0.25

    def __post_init__(self):
        # type: () -> None
        if self.n < 1 or self.m < 1 or self.f < 1:
            raise ParameterError(f'n, m, and f must be positive, but got {self.n}, {self.m}, {self.f}')
        if self.aspect_ratio < 1:
            raise ParameterError(f'aspect ratio C must be >= 1, but got {self.aspect_ratio}')
        if self.length < 0:
            raise ParameterError(f'trace length must be non-negative, but got {self.length}')
        if not 0 <= self.insert_ratio <= 1:
            raise ParameterError(f'insert ratio must be in [0, 1], but got {self.insert_ratio}')
        if self.num_elements is not None and self.num_elements < 1:
            raise ParameterError(f'num_elements must be positive, but got {self.num_elements}')
        if self.max_set_size is not None and self.max_set_size < 1:
            raise ParameterError(f'max_set_size must be positive, but got {self.max_set_size}')
        if self.generator == GeneratorKind.BIPARTITE and (self.n < 2 or self.n % 2):
            raise ParameterError(f'the bipartite generator needs an even n >= 2, but got {self.n}')

    @property
    def universe_size(self):
        # type: () -> int
        """The number of distinct element ids."""
        return self.num_elements if self.num_elements is not None else self.n


# generators

class _Bag:
    """A set of ints with deterministic uniform sampling."""

    def __init__(self, items=()):
        # type: (Any) -> None
        self.items = [] # type: list[int]
        self.index = {} # type: dict[int, int]
        for item in items:
            self.add(item)

    def __len__(self):
        # type: () -> int
        return len(self.items)

    def add(self, item):
        # type: (int) -> None
        self.index[item] = len(self.items)
        self.items.append(item)

    def remove(self, item):
        # type: (int) -> None
        position = self.index.pop(item)
        last = self.items.pop()
        if last != item:
            self.items[position] = last
            self.index[last] = position

    def choice(self, rng):
        # type: (Random) -> int
        return self.items[rng.randrange(len(self.items))]


def _random_trace(rng, num_elements, capacity, length, insert_ratio):
    # type: (Random, int, int, int, float) -> list[UpdateStep]
    alive = _Bag()
    absent = _Bag(range(num_elements))
    trace = []
    for _ in range(length):
        can_insert = absent and len(alive) < capacity
        if can_insert and (not alive or rng.random() < insert_ratio):
            element = absent.choice(rng)
            absent.remove(element)
            alive.add(element)
            trace.append(UpdateStep.insert(element))
        elif alive:
            element = alive.choice(rng)
            alive.remove(element)
            absent.add(element)
            trace.append(UpdateStep.delete(element))
    return trace


def _random_system(rng, spec):
    # type: (Random, WorkloadSpec) -> Optional[SetSystem]
    """Draw a random set system, or None if some set came out empty."""
    num_elements = spec.universe_size
    max_size = spec.max_set_size or max(1, num_elements // 2)
    members = [set() for _ in range(spec.m)] # type: list[set[int]]
    frequency = [0] * num_elements
    elements = list(range(num_elements))
    rng.shuffle(elements)
    for position, element in enumerate(elements):
        set_id = position if position < spec.m else rng.randrange(spec.m)
        members[set_id].add(element)
        frequency[element] += 1
    for set_id in range(spec.m):
        target = rng.randint(1, max_size)
        # at most 2 * target draws per set
        for _ in range(2 * target):
            if len(members[set_id]) >= target:
                break
            element = rng.randrange(num_elements)
            if frequency[element] < spec.f and element not in members[set_id]:
                members[set_id].add(element)
                frequency[element] += 1
    if any(not elements for elements in members):
        return None
    costs = [rng.uniform(1 / spec.aspect_ratio, 1.0) for _ in range(spec.m)]
    return SetSystem(costs, members, spec.n, spec.aspect_ratio, declared_frequency=spec.f)


def gen_random(spec):
    # type: (WorkloadSpec) -> tuple[SetSystem, list[UpdateStep]]
    """Generate a random instance and trace, deterministic under the seed."""
    rng = Random(spec.seed)
    for attempt in range(GENERATOR_RETRY_CAP):
        system = _random_system(rng, spec)
        if system is not None:
            break
        LOGGER.debug('random instance attempt %d had an empty set; retrying', attempt)
    else:
        raise ParameterError(
            f'could not generate {spec.m} non-empty sets over {spec.universe_size} elements'
            f' with f={spec.f} in {GENERATOR_RETRY_CAP} attempts'
        )
    trace = _random_trace(rng, spec.universe_size, spec.n, spec.length, spec.insert_ratio)
    return system, trace


def gen_pd_adversarial(n, f):
    # type: (int, int) -> tuple[SetSystem, list[UpdateStep]]
    """Generate f unit-cost singleton sets per element, insert all, then delete all but the last."""
    if n < 1 or f < 1:
        raise ParameterError(f'n and f must be positive, but got {n} and {f}')
    members = [[element] for element in range(n) for _ in range(f)]
    labels = [f'S{element}.{copy}' for element in range(n) for copy in range(f)]
    system = SetSystem([1.0] * (n * f), members, n, declared_frequency=f, set_labels=labels)
    trace = [UpdateStep.insert(element) for element in range(n)]
    trace.extend(UpdateStep.delete(element) for element in range(n - 1))
    return system, trace


def gen_bipartite_reconfig(n):
    # type: (int) -> tuple[SetSystem, CoverSolution, CoverSolution]
    """Encode vertex cover of K_{n/2,n/2} as set cover; return it with the left and right covers."""
    if n < 2 or n % 2:
        raise ParameterError(f'n must be even and at least 2, but got {n}')
    half = n // 2
    members = [[] for _ in range(n)] # type: list[list[int]]
    element_labels = []
    for left in range(half):
        for right in range(half):
            edge = left * half + right
            members[left].append(edge)
            members[half + right].append(edge)
            element_labels.append(f'L{left}-R{right}')
    set_labels = [f'L{vertex}' for vertex in range(half)] + [f'R{vertex}' for vertex in range(half)]
    system = SetSystem(
        [1.0] * n, members, half * half,
        declared_frequency=2, set_labels=set_labels, element_labels=element_labels,
    )
    source = CoverSolution.of(system, range(half))
    target = CoverSolution.of(system, range(half, n))
    return system, source, target


def gen_robustness_attack(system, cover, charges, delta):
    # type: (SetSystem, CoverSolution, ChargeVector, float) -> list[int]
    """Pick floor(delta * cost(X)) alive elements with the highest charges."""
    if not 0 < delta < 1:
        raise ParameterError(f'delta must be in (0, 1), but got {delta}')
    cost = fsum(system.costs[set_id] for set_id in cover.members)
    size = floor(delta * cost + TOLERANCE * max(1.0, cost))
    ranked = sorted(charges.charges, key=(lambda element: (-charges.charges[element], element)))
    return sorted(ranked[:size])


def generate(spec):
    # type: (WorkloadSpec) -> tuple[SetSystem, list[UpdateStep]]
    """Generate the instance and trace a workload describes."""
    if spec.generator == GeneratorKind.PD_ADVERSARIAL:
        return gen_pd_adversarial(spec.n, spec.f)
    if spec.generator == GeneratorKind.BIPARTITE:
        system, _, _ = gen_bipartite_reconfig(spec.n)
        return system, [UpdateStep.insert(element) for element in range(system.num_elements)]
    if spec.generator == GeneratorKind.ROBUSTNESS_ATTACK:
        system, _ = gen_random(WorkloadSpec(
            n=spec.n, m=spec.m, f=spec.f, aspect_ratio=spec.aspect_ratio, length=0,
            seed=spec.seed, num_elements=spec.num_elements, max_set_size=spec.max_set_size,
        ))
        alive = list(range(min(system.num_elements, system.capacity)))
        cover, charges = greedy_cover(system, alive)
        attack = gen_robustness_attack(system, cover, charges, spec.delta)
        trace = [UpdateStep.insert(element) for element in alive]
        trace.extend(UpdateStep.delete(element) for element in attack)
        return system, trace
    return gen_random(spec)


# backgrounds

class PinnedCover(DynamicAlgorithm):
    """A background whose cover is set from outside, for replaying reconfigurations."""

    def __init__(self, system, cover, alpha=2.0):
        # type: (SetSystem, CoverSolution, float) -> None
        super().__init__(system)
        self.cover = cover.copy()
        self.alpha = alpha

    def pin(self, cover):
        # type: (CoverSolution) -> None
        """Replace the cover."""
        self.cover = cover.copy()

    def insert(self, element):
        # type: (int) -> int
        self._check_insert(element)
        if not covered_by(self.system, element, self.cover.members):
            raise ParameterError(f'the pinned cover does not cover element {element}')
        self.alive.add(element)
        return 0

    def delete(self, element):
        # type: (int) -> int
        self._check_delete(element)
        self.alive.remove(element)
        return 0

    def current_cover(self):
        # type: () -> CoverSolution
        return self.cover

    def approx_alpha(self):
        # type: () -> float
        return self.alpha

    def lower_bound(self):
        # type: () -> float
        return 0.0


def make_algorithm(kind, system, epsilon):
    # type: (AlgorithmKind, SetSystem, float) -> DynamicAlgorithm
    """Create a background algorithm."""
    if kind == AlgorithmKind.LEVEL_GREEDY:
        return LevelGreedy(system, epsilon)
    if kind == AlgorithmKind.LAZY_PD:
        return LazyPrimalDual(system, epsilon)
    return RecomputeGreedy(system)


def make_pipeline(kind, background, epsilon, strict_naive=False):
    # type: (TransformKind, DynamicAlgorithm, float, bool) -> Pipeline
    """Wrap a background algorithm as configured."""
    if kind == TransformKind.LF:
        return wrap(background, epsilon, TransformMode.LOW_FREQUENCY, strict_naive)
    if kind == TransformKind.HF:
        return wrap(background, epsilon, TransformMode.HIGH_FREQUENCY, strict_naive)
    return Passthrough(background)


# experiments

@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to replay one experiment."""
    workload: WorkloadSpec = field(default_factory=WorkloadSpec)
    instance: Optional[str] = None
    algorithm: AlgorithmKind = AlgorithmKind.RECOMPUTE
    transform: TransformKind = TransformKind.LF
    epsilon: float = DEFAULT_EPSILON
    strict_naive: bool = False
    oracle: OracleMode = OracleMode.AUTO
    audit_every: int = 1
    node_budget: int = DEFAULT_NODE_BUDGET

    def __post_init__(self):
        # type: () -> None
        if not 0 < self.epsilon < 1:
            raise ParameterError(f'epsilon must be in (0, 1), but got {self.epsilon}')
        if self.audit_every < 0:
            raise ParameterError(f'audit_every must be non-negative, but got {self.audit_every}')
        if self.node_budget < 1:
            raise ParameterError(f'node budget must be positive, but got {self.node_budget}')

    @property
    def seed(self):
        # type: () -> int
        """The seed of the workload."""
        return self.workload.seed


@dataclass
class ExperimentResult:
    """The per-step reports and failures of an experiment."""
    config: ExperimentConfig
    reports: list[StepReport] = field(default_factory=list)
    failures: list[Finding] = field(default_factory=list)
    work_counter: int = 0
    wall_nsec: int = 0
    oracle_hits: int = 0
    oracle_misses: int = 0

    @property
    def ok(self):
        # type: () -> bool
        """Whether every check held at every step."""
        return not self.failures

    @property
    def max_recourse(self):
        # type: () -> int
        return max((report.recourse for report in self.reports), default=0)

    @property
    def mean_recourse(self):
        # type: () -> float
        if not self.reports:
            return 0.0
        return sum(report.recourse for report in self.reports) / len(self.reports)

    @property
    def max_ratio(self):
        # type: () -> Optional[float]
        """The largest ratio over steps whose optimum (or lower bound) is positive."""
        ratios = [
            report.ratio for report in self.reports
            if report.opt_or_lb is not None and report.opt_or_lb > TOLERANCE
        ]
        return max(ratios, default=None)

    @property
    def nsec_per_update(self):
        # type: () -> float
        return self.wall_nsec / len(self.reports) if self.reports else 0.0

    def failed_properties(self):
        # type: () -> set[str]
        """Return the names of the properties that failed."""
        return {failure.prop for failure in self.failures}

    def summary(self):
        # type: () -> dict[str, Any]
        """Summarize the experiment as JSON-compatible data."""
        config = asdict(self.config)
        return {
            'seed': self.config.seed,
            'config': _jsonable(config),
            'steps': len(self.reports),
            'max_recourse': self.max_recourse,
            'mean_recourse': self.mean_recourse,
            'max_ratio': _finite_or_none(self.max_ratio),
            'nsec_per_update': self.nsec_per_update,
            'work_counter': self.work_counter,
            'oracle_hits': self.oracle_hits,
            'oracle_misses': self.oracle_misses,
            'failures': [str(failure) for failure in self.failures],
            'ok': self.ok,
        }


class _Oracle:
    """Exact optima with a cache, falling back to the background's lower bound."""

    def __init__(self, config, system, background):
        # type: (ExperimentConfig, SetSystem, DynamicAlgorithm) -> None
        self.mode = config.oracle
        self.system = system
        self.background = background
        self.budget = config.node_budget
        self.cache = LRUCache(ORACLE_CACHE_SIZE) # type: LRUCache[frozenset[int], Optional[float]]
        if self.mode == OracleMode.AUTO:
            self.exact = system.num_sets <= ORACLE_MAX_SETS
        else:
            self.exact = self.mode == OracleMode.EXACT

    def _optimum(self, alive):
        # type: (frozenset[int]) -> Optional[float]
        try:
            return exact_cover(self.system, alive, self.budget).total_cost
        except BudgetExhausted as error:
            LOGGER.info('exact oracle gave up: %s', error)
            return None

    def annotate(self, report, alive):
        # type: (StepReport, set[int]) -> None
        if self.mode == OracleMode.OFF:
            return
        if self.exact:
            key = frozenset(alive)
            report.optimum = self.cache.get_or_compute(key, (lambda: self._optimum(key)))
        if report.optimum is None:
            report.lower_bound = self.background.lower_bound()


def _check_claims(config, pipeline, report, failures):
    # type: (ExperimentConfig, Pipeline, StepReport, list[Finding]) -> None
    """Check the approximation guarantees against an exact optimum."""
    if report.optimum is None or report.optimum <= TOLERANCE:
        return
    ratio = report.output_cost / report.optimum
    epsilon = config.epsilon
    if config.transform == TransformKind.LF:
        alpha = pipeline.background.approx_alpha()
        if not at_most(ratio, (2 + epsilon) * alpha):
            failures.append(Finding('lf-approximation', report.step, f'ratio {ratio} > (2 + eps) * alpha'))
        # a stretched interval may add more naive sets than the start-of-interval bound allows
        if report.interval_start and not report.stretched and not at_most(ratio, (1 + epsilon / 3) * alpha):
            failures.append(Finding('interval-start', report.step, f'ratio {ratio} > (1 + eps/3) * alpha'))
    elif config.transform == TransformKind.HF:
        bound = (2 + 8 * epsilon) * log(pipeline.system.capacity)
        if not at_most(ratio, bound):
            failures.append(Finding('hf-approximation', report.step, f'ratio {ratio} > (2 + 8 eps) ln n = {bound}'))


def _load_workload(config):
    # type: (ExperimentConfig) -> tuple[SetSystem, list[UpdateStep]]
    if config.instance is not None:
        return load_instance(config.instance)
    return generate(config.workload)


def run_experiment(config):
    # type: (ExperimentConfig) -> ExperimentResult
    """Replay a trace through the configured pipeline, checking every step."""
    system, trace = _load_workload(config)
    LOGGER.info(
        'experiment: %s, %s over %s, %d updates, seed %d',
        config.transform.value, config.algorithm.value, system, len(trace), config.seed,
    )
    background = make_algorithm(config.algorithm, system, config.epsilon)
    pipeline = make_pipeline(config.transform, background, config.epsilon, config.strict_naive)
    oracle = _Oracle(config, system, background)
    result = ExperimentResult(config)
    failures = result.failures
    stopwatch = Stopwatch()
    coverage = CoverageCounter(system)
    coverage.sync(pipeline.output_cover(), pipeline.universe.alive, pipeline.universe.alive)
    for update in trace:
        try:
            with stopwatch:
                report = pipeline.step(update)
        except DyncoverError as error:
            failures.append(Finding('step', pipeline.steps + 1, f'{type(error).__name__}: {error}'))
            LOGGER.warning('step %d failed: %s', pipeline.steps + 1, error)
            break
        oracle.annotate(report, pipeline.universe.alive)
        result.reports.append(report)
        uncovered = coverage.sync(pipeline.output_cover(), pipeline.universe.alive, (update.element,))
        if uncovered:
            failures.append(Finding('legality', report.step, f'output misses elements {uncovered[:5]}'))
        cap = pipeline.recourse_cap
        if cap is not None and report.recourse > cap:
            failures.append(Finding('recourse-cap', report.step, f'recourse {report.recourse} > {cap}'))
        if config.audit_every and report.step % config.audit_every == 0:
            audit = pipeline.check_containment()
            if isinstance(background, LevelGreedy):
                audit.extend(background.audit())
            failures.extend(
                Finding(finding.prop, report.step, f'{finding.subject}: {finding.detail}', finding.slack)
                for finding in audit.findings
            )
        _check_claims(config, pipeline, report, failures)
    for failure in failures:
        LOGGER.warning('failed %s at step %s: %s', failure.prop, failure.subject, failure.detail)
    result.wall_nsec = stopwatch.elapsed_nsec
    result.work_counter = background.work_counter
    result.oracle_hits = oracle.cache.hits
    result.oracle_misses = oracle.cache.misses
    LOGGER.info(
        'experiment done: %d steps, max recourse %d, %d failures',
        len(result.reports), result.max_recourse, len(failures),
    )
    return result


def run_batch(configs, workers=1):
    # type: (list[ExperimentConfig], int) -> list[ExperimentResult]
    """Run independent experiments, in parallel processes if workers > 1."""
    if workers <= 1:
        return [run_experiment(config) for config in configs]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(run_experiment, configs))


# static experiments

@dataclass
class PDNonRobustnessReport:
    """A frozen all-tight primal-dual cover measured against shrinking optima."""
    n: int
    f: int
    cover_cost: float
    initial_optimum: float
    greedy_cost: float
    deleted: list[int] = field(default_factory=list)
    ratios: list[float] = field(default_factory=list)
    removals_needed: list[int] = field(default_factory=list)
    greedy_robustness: list[RobustnessReport] = field(default_factory=list)


def pd_non_robustness(n, f, target_ratio=2.0, budget=DEFAULT_NODE_BUDGET):
    # type: (int, int, float, int) -> PDNonRobustnessReport
    """Freeze the all-tight primal-dual cover of the singleton instance and delete elements one by one."""
    system, trace = gen_pd_adversarial(n, f)
    alive = set(range(n))
    cover, _ = primal_dual_cover(system, alive, PDMode.ALL_TIGHT)
    greedy, charges = greedy_cover(system, alive)
    report = PDNonRobustnessReport(
        n=n,
        f=f,
        cover_cost=cover.total_cost,
        initial_optimum=exact_cover(system, alive, budget).total_cost,
        greedy_cost=greedy.total_cost,
    )
    for step in trace[n:]:
        alive.remove(step.element)
        report.deleted.append(step.element)
        optimum = exact_cover(system, alive, budget).total_cost
        report.ratios.append(cover.total_cost / optimum)
        report.removals_needed.append(max(0, round(cover.total_cost - target_ratio * optimum)))
        if len(report.deleted) < greedy.total_cost:
            report.greedy_robustness.append(robustness_check(
                system, greedy, charges, report.deleted, exact_limit=system.num_sets, budget=budget,
            ))
    return report


@dataclass
class NaiveMaintenanceReport:
    """Ratios of a frozen level greedy cover maintained naively under updates."""
    delta: float
    bound: float
    initial_cost: float
    updates: list[UpdateStep] = field(default_factory=list)
    ratios: list[float] = field(default_factory=list)
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self):
        # type: () -> bool
        return not self.findings


def naive_maintenance_check(system, epsilon, delta, alive=None, budget=DEFAULT_NODE_BUDGET):
    # type: (SetSystem, float, float, Optional[list[int]], int) -> NaiveMaintenanceReport
    """Freeze a level greedy cover and maintain it naively under adversarial updates.

    The adversary first deletes the alive elements with the most dual weight,
    then inserts the elements that the frozen cover misses, those whose
    cheapest containing set costs the most first. Every inserted element
    gets its cheapest containing set added. The ratio to the exact
    optimum is checked against (1 + 10 delta)(1 + epsilon) ln n after every
    update.
    """
    if not 0 <= delta <= 1:
        raise ParameterError(f'delta must be in [0, 1], but got {delta}')
    if alive is None:
        alive = list(range(min(system.num_elements, system.capacity)))
    level_greedy = LevelGreedy(system, epsilon)
    for element in alive:
        level_greedy.insert(element)
    frozen = level_greedy.current_cover().copy()
    maintained = frozen.copy()
    bound = (1 + 10 * delta) * (1 + epsilon) * log(system.capacity)
    report = NaiveMaintenanceReport(delta, bound, frozen.total_cost)
    count = floor(delta * frozen.total_cost + TOLERANCE * max(1.0, frozen.total_cost))
    weight = {
        element: 1 / level_greedy.beta ** level_greedy.level(element)
        - 1 / level_greedy.beta ** level_greedy.passive_levels[element]
        for element in alive
    }
    deletions = sorted(alive, key=(lambda element: (-weight[element], element)))[:(count + 1) // 2]
    current = set(alive)
    report.updates.extend(UpdateStep.delete(element) for element in deletions)
    current.difference_update(deletions)
    missed = sorted(
        (
            element for element in range(system.num_elements)
            if element not in current and not covered_by(system, element, frozen.members)
        ),
        key=(lambda element: (-system.costs[system.cheapest_set(element)], element)),
    )
    room = system.capacity - len(current)
    insertions = missed[:max(0, min(count - len(deletions), room))]
    report.updates.extend(UpdateStep.insert(element) for element in insertions)
    current = set(alive)
    for update in report.updates:
        if update.kind == UpdateKind.DELETE:
            current.remove(update.element)
        else:
            current.add(update.element)
            maintained.include(system, system.cheapest_set(update.element))
        optimum = exact_cover(system, current, budget).total_cost
        if optimum <= TOLERANCE:
            report.ratios.append(1.0 if maintained.total_cost <= TOLERANCE else INF)
            continue
        ratio = maintained.total_cost / optimum
        report.ratios.append(ratio)
        if not at_most(ratio, bound):
            report.findings.append(Finding('naive-maintenance', len(report.ratios), f'ratio {ratio} > {bound}'))
    return report


@dataclass
class ReconfigurationReport:
    """A transform replay from one side of K_{n/2,n/2} to the other."""
    source_cost: float
    target_cost: float
    max_output_cost: float = 0.0
    steps: int = 0
    adds_before_removes: bool = True
    feasible: bool = True
    reached_target: bool = False


def replay_reconfiguration(n, epsilon=0.5, max_steps=None):
    # type: (int, float, Optional[int]) -> ReconfigurationReport
    """Drive the transform from the left cover to the right cover of K_{n/2,n/2}."""
    system, source, target = gen_bipartite_reconfig(n)
    background = PinnedCover(system, source)
    for element in range(system.num_elements):
        background.insert(element)
    transform = wrap(background, epsilon, TransformMode.LOW_FREQUENCY)
    background.pin(target)
    report = ReconfigurationReport(source.total_cost, target.total_cost, transform.output.total_cost)
    if max_steps is None:
        max_steps = 8 * (n + transform.recourse_cap) * (transform.half_length + 1)
    removed_any = False
    previous = set(transform.output.members)
    for index in range(max_steps):
        element = index // 2 % system.num_elements
        update = UpdateStep.delete(element) if index % 2 == 0 else UpdateStep.insert(element)
        transform.step(update)
        members = transform.output.members
        if previous - members:
            removed_any = True
        if (members - previous) and removed_any:
            report.adds_before_removes = False
        previous = set(members)
        report.steps += 1
        report.max_output_cost = max(report.max_output_cost, transform.output.total_cost)
        if not is_cover(system, transform.universe, transform.output):
            report.feasible = False
        if members == target.members and transform.universe.alive == set(range(system.num_elements)):
            report.reached_target = True
            break
    return report


def solve_static(system, universe, algorithm='greedy', budget=DEFAULT_NODE_BUDGET):
    # type: (SetSystem, Union[set[int], list[int]], str, int) -> dict[str, Any]
    """Solve a static instance and describe the solution as JSON-compatible data."""
    labels = system.set_labels
    element_labels = system.element_labels
    result = {'algorithm': algorithm} # type: dict[str, Any]
    if algorithm == 'greedy':
        cover, charges = greedy_cover(system, universe)
        audit = charge_audit(system, charges)
        result['charges'] = {element_labels[element]: value for element, value in sorted(charges.charges.items())}
        result['lower_bound'] = charges.total / audit.stats['h_n']
        result['h_n'] = audit.stats['h_n']
        result['h_d'] = audit.stats['h_d']
    elif algorithm in ('pd-all', 'pd-first'):
        mode = PDMode.ALL_TIGHT if algorithm == 'pd-all' else PDMode.FIRST_TIGHT
        cover, duals = primal_dual_cover(system, universe, mode)
        result['duals'] = {element_labels[element]: value for element, value in sorted(duals.duals.items())}
        result['lower_bound'] = duals.total
    elif algorithm == 'exact':
        try:
            cover = exact_cover(system, universe, budget)
            result['lower_bound'] = cover.total_cost
            result['optimal'] = True
        except BudgetExhausted as error:
            cover = error.incumbent
            result['lower_bound'] = error.bound
            result['optimal'] = False
    else:
        raise ParameterError(f'unknown static algorithm {algorithm!r}')
    result['cover'] = [labels[set_id] for set_id in cover]
    result['cost'] = cover.total_cost
    return result


# reports

CSV_COLUMNS = (
    'step', 'kind', 'element', 'recourse', 'output_size', 'cost_output',
    'cost_background', 'opt_or_lb', 'ratio', 'interval', 'phase',
)


def _format_optional(value):
    # type: (Optional[float]) -> str
    if value is None:
        return ''
    return repr(value)


def write_csv(result, path):
    # type: (ExperimentResult, Union[str, Path]) -> None
    """Write one row per step."""
    with Path(path).open('w', encoding='utf-8', newline='') as fd:
        writer = csv.writer(fd)
        writer.writerow(CSV_COLUMNS)
        for report in result.reports:
            writer.writerow([
                report.step,
                report.kind.value,
                report.element,
                report.recourse,
                report.output_size,
                repr(report.output_cost),
                repr(report.background_cost),
                _format_optional(report.opt_or_lb),
                _format_optional(report.ratio),
                report.interval,
                report.phase.value if report.phase is not None else '',
            ])


def write_summary(result, path):
    # type: (ExperimentResult, Union[str, Path]) -> None
    """Write the aggregate summary as JSON."""
    Path(path).write_text(json.dumps(result.summary(), indent=2) + '\n', encoding='utf-8')


def write_plot_data(result, path):
    # type: (ExperimentResult, Union[str, Path]) -> None
    """Write a whitespace-separated table for gnuplot."""
    lines = ['# step recourse cost_output opt_or_lb ratio']
    for report in result.reports:
        values = [report.opt_or_lb, report.ratio]
        lines.append(' '.join([
            str(report.step),
            str(report.recourse),
            repr(report.output_cost),
            *('nan' if value is None or not isfinite(value) else repr(value) for value in values),
        ]))
    Path(path).write_text('\n'.join(lines) + '\n', encoding='utf-8')


def _jsonable(value):
    # type: (Any) -> Any
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    return value


def _finite_or_none(value):
    # type: (Optional[float]) -> Optional[float]
    if value is None or not isfinite(value):
        return None
    return value
