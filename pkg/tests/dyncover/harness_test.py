"""Tests for harness.py."""

import csv
import json
from dataclasses import replace
from itertools import permutations
from math import inf as INF, log
from typing import Any

from dyncover.core import SetSystem, UpdateKind, CoverSolution, approx_equal, is_cover, replay, save_instance
from dyncover.errors import ParameterError
from dyncover.harness import GeneratorKind, AlgorithmKind, TransformKind, OracleMode
from dyncover.harness import WorkloadSpec, ExperimentConfig, ExperimentResult, CSV_COLUMNS
from dyncover.harness import gen_random, gen_pd_adversarial, gen_bipartite_reconfig, gen_robustness_attack, generate
from dyncover.harness import run_experiment, run_batch, pd_non_robustness, naive_maintenance_check
from dyncover.harness import replay_reconfiguration, solve_static, write_csv, write_summary, write_plot_data
from dyncover.recourse_transform import StepReport
from dyncover.static_solvers import greedy_cover
from dyncover.timing import get_msec


def four_elements():
    # type: () -> SetSystem
    """Build S0={0,1}, S1={2,3}, S2={0,1,2}, all of unit cost."""
    return SetSystem([1, 1, 1], [[0, 1], [2, 3], [0, 1, 2]], 4)


def small_config(**kwargs):
    # type: (Any) -> ExperimentConfig
    """Build the configuration of a short random experiment."""
    workload = WorkloadSpec(n=8, m=6, f=2, length=40, seed=3)
    return ExperimentConfig(workload=workload, **kwargs)


def test_workload_spec():
    # type: () -> None
    """Test the validation of workload parameters."""
    spec = WorkloadSpec()
    assert (spec.n, spec.m, spec.f, spec.length, spec.seed) == (16, 12, 3, 500, 0)
    assert spec.universe_size == 16
    assert WorkloadSpec(num_elements=20).universe_size == 20
    bad_specs = [
        {'n': 0},
        {'f': 0},
        {'aspect_ratio': 0.5},
        {'length': -1},
        {'insert_ratio': 1.5},
        {'num_elements': 0},
        {'max_set_size': 0},
        {'generator': GeneratorKind.BIPARTITE, 'n': 3},
    ]
    for kwargs in bad_specs:
        try:
            WorkloadSpec(**kwargs)
            assert False, kwargs
        except ParameterError:
            pass


def test_gen_random():
    # type: () -> None
    """Test that random instances are valid and reproducible."""
    spec = WorkloadSpec(n=10, m=8, f=3, aspect_ratio=4, length=100, seed=7, num_elements=14)
    system, trace = gen_random(spec)
    assert system.num_sets == 8
    assert system.num_elements == 14
    assert system.capacity == 10
    assert system.frequency <= 3
    assert all(system.members)
    assert all(0.25 <= cost <= 1 for cost in system.costs)
    assert len(trace) == 100
    universe = replay(system, trace)
    assert len(universe.alive) <= 10
    other_system, other_trace = gen_random(spec)
    assert other_system.members == system.members
    assert other_system.costs == system.costs
    assert other_trace == trace
    try:
        gen_random(WorkloadSpec(n=2, m=5, f=1))
        assert False
    except ParameterError as err:
        assert 'attempts' in str(err)


def test_gen_pd_adversarial():
    # type: () -> None
    """Test the singleton instance."""
    system, trace = gen_pd_adversarial(4, 2)
    assert system.num_sets == 8
    assert system.frequency == 2
    assert system.set_labels[:3] == ('S0.0', 'S0.1', 'S1.0')
    assert [step.kind for step in trace] == [UpdateKind.INSERT] * 4 + [UpdateKind.DELETE] * 3
    assert replay(system, trace).alive == {3}
    try:
        gen_pd_adversarial(0, 2)
        assert False
    except ParameterError:
        pass


def test_gen_bipartite_reconfig():
    # type: () -> None
    """Test the bipartite reconfiguration instance."""
    system, source, target = gen_bipartite_reconfig(4)
    assert system.num_sets == 4
    assert system.num_elements == 4
    assert system.frequency == 2
    assert system.element_labels == ('L0-R0', 'L0-R1', 'L1-R0', 'L1-R1')
    assert source.members == {0, 1}
    assert target.members == {2, 3}
    assert source.total_cost == target.total_cost == 2
    for n in (1, 5):
        try:
            gen_bipartite_reconfig(n)
            assert False
        except ParameterError:
            pass


def test_bipartite_order():
    # type: () -> None
    """Test that every feasible reconfiguration order adds both right vertices first."""
    system, source, _ = gen_bipartite_reconfig(4)
    edges = range(system.num_elements)
    moves = [('add', 2), ('add', 3), ('remove', 0), ('remove', 1)]
    for order in permutations(moves):
        cover = source.copy()
        feasible = True
        for action, set_id in order:
            if action == 'add':
                cover.include(system, set_id)
            else:
                cover.exclude(system, set_id)
            feasible = feasible and is_cover(system, edges, cover)
        adds_first = all(action == 'add' for action, _ in order[:2])
        assert feasible == adds_first
    assert is_cover(system, edges, CoverSolution([2, 3]))


def test_gen_robustness_attack():
    # type: () -> None
    """Test that the attack deletes the most charged elements."""
    system = four_elements()
    cover, charges = greedy_cover(system, range(4))
    assert gen_robustness_attack(system, cover, charges, 0.5) == [3]
    assert gen_robustness_attack(system, cover, charges, 0.25) == []
    try:
        gen_robustness_attack(system, cover, charges, 1)
        assert False
    except ParameterError:
        pass


def test_generate():
    # type: () -> None
    """Test that each generator kind produces a legal trace."""
    system, trace = generate(WorkloadSpec(generator=GeneratorKind.BIPARTITE, n=4))
    assert system.num_sets == 4
    assert [step.element for step in trace] == [0, 1, 2, 3]
    system, trace = generate(WorkloadSpec(generator=GeneratorKind.PD_ADVERSARIAL, n=5, f=2))
    assert len(trace) == 9
    system, trace = generate(WorkloadSpec(generator=GeneratorKind.ROBUSTNESS_ATTACK, n=16, m=12, f=3, delta=0.5))
    kinds = [step.kind for step in trace]
    inserts = kinds.count(UpdateKind.INSERT)
    assert inserts == 16
    assert kinds == [UpdateKind.INSERT] * inserts + [UpdateKind.DELETE] * (len(trace) - inserts)
    replay(system, trace)
    system, trace = generate(WorkloadSpec(length=30))
    assert len(trace) == 30


def test_experiment_config():
    # type: () -> None
    """Test the validation of experiment parameters."""
    config = ExperimentConfig()
    assert config.seed == 0
    assert config.transform == TransformKind.LF
    for kwargs in ({'epsilon': 1}, {'epsilon': 0}, {'audit_every': -1}, {'node_budget': 0}):
        try:
            ExperimentConfig(**kwargs)
            assert False, kwargs
        except ParameterError:
            pass


def test_run_experiment():
    # type: () -> None
    """Test experiments over every background and transform."""
    result = run_experiment(small_config(algorithm=AlgorithmKind.LAZY_PD, transform=TransformKind.NONE))
    assert result.ok, result.failures
    assert len(result.reports) == 40
    assert result.work_counter > 0
    assert result.oracle_hits + result.oracle_misses == 40
    assert all(report.optimum is not None for report in result.reports)
    result = run_experiment(small_config(algorithm=AlgorithmKind.RECOMPUTE, transform=TransformKind.LF))
    assert result.ok, result.failures
    assert len(result.reports) == 40
    assert result.max_recourse <= 7
    result = run_experiment(small_config(algorithm=AlgorithmKind.LEVEL_GREEDY, transform=TransformKind.HF))
    assert result.ok, result.failures
    assert result.reports[0].interval == 0
    result = run_experiment(small_config(transform=TransformKind.LF, strict_naive=True, audit_every=0))
    assert result.ok, result.failures
    # h rounds up to one step here, so only the running bound is checked at interval starts
    config = ExperimentConfig(
        workload=WorkloadSpec(n=16, seed=6),
        algorithm=AlgorithmKind.LAZY_PD,
        transform=TransformKind.LF,
        epsilon=0.2,
    )
    result = run_experiment(config)
    assert result.ok, result.failures
    assert all(report.stretched for report in result.reports)


def test_max_ratio():
    # type: () -> None
    """Test that steps with a zero optimum do not make the worst ratio infinite."""
    result = ExperimentResult(small_config())
    result.reports.append(StepReport(1, UpdateKind.INSERT, 0, 1, 1, 2.0, 2.0, 0, None, optimum=1.0))
    result.reports.append(StepReport(2, UpdateKind.DELETE, 0, 0, 1, 2.0, 0.0, 0, None, optimum=0.0))
    assert result.reports[-1].ratio == INF
    assert result.max_ratio == 2
    assert result.summary()['max_ratio'] == 2
    result.reports.pop(0)
    assert result.max_ratio is None


def test_long_traces():
    # type: () -> None
    """Test legality and the recourse cap of timed long traces on a large instance."""
    workload = WorkloadSpec(n=4096, m=8192, f=8, length=3000, seed=1, num_elements=8192, max_set_size=16)
    # caps are ceil(12 * scale * C / epsilon) + 1, with scale 1 for HF and 1.2 * 8 for LF over lazy primal-dual
    for algorithm, transform, cap in (
            (AlgorithmKind.LEVEL_GREEDY, TransformKind.HF, 61),
            (AlgorithmKind.LAZY_PD, TransformKind.LF, 577),
        ):
        config = ExperimentConfig(
            workload=workload,
            algorithm=algorithm,
            transform=transform,
            epsilon=0.2,
            oracle=OracleMode.OFF,
            audit_every=0,
        )
        start_msec = get_msec()
        result = run_experiment(config)
        assert get_msec() - start_msec < 20_000
        assert result.ok, result.failures[:5]
        assert len(result.reports) == 3000
        assert result.max_recourse <= cap


def test_oracle_modes():
    # type: () -> None
    """Test the optimum estimates of each oracle mode."""
    result = run_experiment(small_config(transform=TransformKind.NONE, oracle=OracleMode.OFF))
    assert all(report.ratio is None for report in result.reports)
    assert result.max_ratio is None
    assert result.summary()['max_ratio'] is None
    result = run_experiment(small_config(transform=TransformKind.NONE, oracle=OracleMode.DUAL))
    assert all(report.optimum is None for report in result.reports)
    assert all(report.lower_bound is not None for report in result.reports)
    result = run_experiment(small_config(transform=TransformKind.NONE, oracle=OracleMode.EXACT))
    assert all(report.optimum is not None for report in result.reports)
    assert result.max_ratio is not None and result.max_ratio >= 1 - 1e-9


def test_instance_experiment(tmp_path):
    # type: (Any) -> None
    """Test an experiment on an instance file."""
    path = tmp_path / 'singletons.txt'
    save_instance(path, *gen_pd_adversarial(5, 2))
    config = ExperimentConfig(
        instance=str(path),
        algorithm=AlgorithmKind.LAZY_PD,
        transform=TransformKind.NONE,
        epsilon=0.5,
    )
    result = run_experiment(config)
    assert result.ok
    assert len(result.reports) == 9
    assert result.reports[-1].optimum == 1


def test_summary_and_files(tmp_path):
    # type: (Any) -> None
    """Test the summary and the output files."""
    result = run_experiment(small_config(algorithm=AlgorithmKind.RECOMPUTE, transform=TransformKind.LF))
    summary = result.summary()
    assert summary['steps'] == 40
    assert summary['seed'] == 3
    assert summary['config']['algorithm'] == 'recompute'
    assert summary['config']['workload']['generator'] == 'random'
    assert summary['ok'] == result.ok
    assert approx_equal(summary['mean_recourse'], result.mean_recourse)
    csv_path = tmp_path / 'steps.csv'
    write_csv(result, csv_path)
    with csv_path.open(encoding='utf-8', newline='') as fd:
        rows = list(csv.reader(fd))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 41
    assert rows[1][1] == '+'
    assert int(rows[1][3]) == result.reports[0].recourse
    summary_path = tmp_path / 'summary.json'
    write_summary(result, summary_path)
    assert json.loads(summary_path.read_text(encoding='utf-8')) == json.loads(json.dumps(summary))
    plot_path = tmp_path / 'plot.dat'
    write_plot_data(result, plot_path)
    lines = plot_path.read_text(encoding='utf-8').splitlines()
    assert lines[0].startswith('# step')
    assert len(lines) == 41
    assert all(len(line.split()) == 5 for line in lines[1:])


def test_determinism(tmp_path):
    # type: (Any) -> None
    """Test that the same seed and configuration give the same CSV."""
    texts = []
    for name in ('first.csv', 'second.csv'):
        result = run_experiment(small_config(algorithm=AlgorithmKind.LEVEL_GREEDY, transform=TransformKind.HF))
        write_csv(result, tmp_path / name)
        texts.append((tmp_path / name).read_text(encoding='utf-8'))
    assert texts[0] == texts[1]


def test_run_batch():
    # type: () -> None
    """Test that parallel batches match sequential ones."""
    base = small_config(algorithm=AlgorithmKind.LAZY_PD, transform=TransformKind.NONE)
    configs = [replace(base, workload=replace(base.workload, seed=seed)) for seed in range(3)]
    sequential = run_batch(configs)
    parallel = run_batch(configs, workers=2)
    assert [result.config.seed for result in parallel] == [0, 1, 2]
    for first, second in zip(sequential, parallel):
        assert [report.recourse for report in first.reports] == [report.recourse for report in second.reports]
        assert first.failures == second.failures


def test_pd_non_robustness():
    # type: () -> None
    """Test that a frozen all-tight cover degrades as elements leave."""
    report = pd_non_robustness(6, 2)
    assert report.cover_cost == 12
    assert report.initial_optimum == 6
    assert report.greedy_cost == 6
    assert report.deleted == [0, 1, 2, 3, 4]
    assert [round(ratio, 6) for ratio in report.ratios] == [2.4, 3.0, 4.0, 6.0, 12.0]
    assert report.removals_needed == [2, 4, 6, 8, 10]
    assert len(report.greedy_robustness) == 5
    assert all(robustness.holds for robustness in report.greedy_robustness)
    report = pd_non_robustness(100, 5)
    assert report.cover_cost == 500
    assert report.initial_optimum == 100
    assert len(report.deleted) == 99
    assert approx_equal(report.ratios[0], 500 / 99)
    assert report.ratios[-1] == 500
    assert report.removals_needed[-1] == 498
    assert len(report.greedy_robustness) == 99
    assert all(robustness.holds for robustness in report.greedy_robustness)


def test_naive_maintenance_check():
    # type: () -> None
    """Test naive maintenance of a frozen level greedy cover."""
    system, _ = gen_random(WorkloadSpec(n=64, m=4, f=2, num_elements=8, length=0, seed=5))
    report = naive_maintenance_check(system, 0.1, 0.5, alive=list(range(6)))
    assert approx_equal(report.bound, 6 * 1.1 * log(64))
    assert report.ok
    try:
        naive_maintenance_check(system, 0.1, 2)
        assert False
    except ParameterError:
        pass
    for seed in range(3):
        system, _ = gen_random(WorkloadSpec(
            n=16, m=10, f=3, aspect_ratio=4, num_elements=24, length=0, seed=seed,
        ))
        for delta in (0.1, 0.5, 0.9):
            report = naive_maintenance_check(system, 0.1, delta, alive=list(range(12)))
            assert approx_equal(report.bound, (1 + 10 * delta) * 1.1 * log(16))
            assert report.ok, [str(finding) for finding in report.findings]
            assert len(report.ratios) == len(report.updates)
            assert len(report.updates) <= delta * report.initial_cost + 1e-9
            kinds = [update.kind for update in report.updates]
            deletions = kinds.count(UpdateKind.DELETE)
            assert kinds == [UpdateKind.DELETE] * deletions + [UpdateKind.INSERT] * (len(kinds) - deletions)
            inserted = [update.element for update in report.updates[deletions:]]
            assert all(element >= 12 for element in inserted)
            # the most expensive elements to cover come first
            costs = [system.costs[system.cheapest_set(element)] for element in inserted]
            assert costs == sorted(costs, reverse=True)


def test_replay_reconfiguration():
    # type: () -> None
    """Test the reconfiguration between the sides of a complete bipartite graph."""
    report = replay_reconfiguration(8)
    assert (report.source_cost, report.target_cost) == (4, 4)
    assert report.reached_target
    assert report.steps == 4
    assert report.max_output_cost == 8
    assert report.adds_before_removes
    assert report.feasible
    report = replay_reconfiguration(100)
    assert report.reached_target
    assert report.steps == 8
    assert report.max_output_cost == 100
    assert report.adds_before_removes
    assert report.feasible
    report = replay_reconfiguration(8, max_steps=2)
    assert not report.reached_target


def test_solve_static():
    # type: () -> None
    """Test solving a static instance with each algorithm."""
    system = four_elements()
    result = solve_static(system, range(4))
    assert result['cover'] == ['S1', 'S2']
    assert result['cost'] == 2
    assert approx_equal(result['h_n'], 25 / 12)
    assert approx_equal(result['lower_bound'], 2 / (25 / 12))
    assert result['charges']['3'] == 1
    result = solve_static(system, range(4), 'exact')
    assert result['optimal']
    assert result['cost'] == 2
    result = solve_static(system, range(4), 'exact', budget=1)
    assert not result['optimal']
    assert result['lower_bound'] <= result['cost']
    result = solve_static(system, range(4), 'pd-first')
    assert set(result['duals']) == {'0', '1', '2', '3'}
    assert result['lower_bound'] <= 2
    result = solve_static(system, range(4), 'pd-all')
    assert result['cost'] >= 2
    try:
        solve_static(system, range(4), 'simplex')
        assert False
    except ParameterError:
        pass
