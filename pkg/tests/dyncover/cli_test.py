"""Tests for cli.py."""

import json
from typing import Any

from dyncover.cli import build_parser, config_from_args, main
from dyncover.core import load_instance
from dyncover.harness import AlgorithmKind, TransformKind, OracleMode, GeneratorKind


def test_parser_defaults():
    # type: () -> None
    """Test that flags map onto an experiment configuration."""
    args = build_parser().parse_args(['run'])
    config = config_from_args(args)
    assert config.algorithm == AlgorithmKind.RECOMPUTE
    assert config.transform == TransformKind.LF
    assert config.oracle == OracleMode.AUTO
    assert config.workload.generator == GeneratorKind.RANDOM
    assert (config.workload.n, config.workload.m, config.workload.f) == (16, 12, 3)
    args = build_parser().parse_args([
        'run', '--algo', 'level-greedy', '--transform', 'hf', '--oracle', 'dual',
        '--generator', 'bipartite', '-n', '6', '--seed', '4', '--strict-naive',
    ])
    config = config_from_args(args)
    assert config.algorithm == AlgorithmKind.LEVEL_GREEDY
    assert config.transform == TransformKind.HF
    assert config.oracle == OracleMode.DUAL
    assert config.workload.generator == GeneratorKind.BIPARTITE
    assert config.seed == 4
    assert config.strict_naive


def test_gen_and_solve(tmp_path, capsys):
    # type: (Any, Any) -> None
    """Test generating an instance and solving its final universe."""
    path = tmp_path / 'singletons.txt'
    assert main(['gen', '--generator', 'pd-adversarial', '-n', '5', '-f', '2', '--out', str(path)]) == 0
    system, trace = load_instance(path)
    assert system.num_sets == 10
    assert len(trace) == 9
    assert main(['solve-static', '--in', str(path)]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result['algorithm'] == 'greedy'
    assert result['cover'] == ['S4.0']
    assert result['cost'] == 1
    out_path = tmp_path / 'exact.json'
    assert main(['solve-static', '--in', str(path), '--algo', 'exact', '--out', str(out_path)]) == 0
    result = json.loads(out_path.read_text(encoding='utf-8'))
    assert result['optimal']
    assert result['cost'] == 1


def test_run(tmp_path, capsys):
    # type: (Any, Any) -> None
    """Test replaying an instance and writing every output."""
    path = tmp_path / 'singletons.json'
    assert main(['gen', '--generator', 'pd-adversarial', '-n', '5', '-f', '2', '--out', str(path)]) == 0
    csv_path = tmp_path / 'steps.csv'
    summary_path = tmp_path / 'summary.json'
    plot_path = tmp_path / 'plot.dat'
    status = main([
        'run', '--in', str(path), '--algo', 'lazy-pd', '--transform', 'none', '--epsilon', '0.5',
        '--out', str(csv_path), '--summary', str(summary_path), '--plot', str(plot_path),
    ])
    assert status == 0
    summary = json.loads(summary_path.read_text(encoding='utf-8'))
    assert summary['steps'] == 9
    assert summary['ok']
    assert len(csv_path.read_text(encoding='utf-8').splitlines()) == 10
    assert len(plot_path.read_text(encoding='utf-8').splitlines()) == 10
    assert main(['run', '-n', '8', '-m', '6', '-f', '2', '--length', '20', '--transform', 'none']) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary['steps'] == 20
    assert summary['config']['transform'] == 'none'
    assert main(['report', str(summary_path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == 'file steps max_recourse mean_recourse max_ratio ok'
    assert lines[1].startswith(f'{summary_path} 9 ')
    assert lines[1].endswith(' yes')


def test_check(capsys):
    # type: (Any) -> None
    """Test running several seeds."""
    status = main([
        'check', '-n', '8', '-m', '6', '-f', '2', '--length', '20', '--seed', '5', '--seeds', '2',
        '--algo', 'lazy-pd', '--transform', 'none',
    ])
    assert status == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2
    assert lines[0].startswith('seed=5 steps=20 ')
    assert lines[1].startswith('seed=6 ')
    assert all(line.endswith(' ok') for line in lines)


def test_report_failures(tmp_path, capsys):
    # type: (Any, Any) -> None
    """Test that a failed summary makes the report fail."""
    path = tmp_path / 'failed.json'
    summary = {'steps': 3, 'max_recourse': 2, 'mean_recourse': 1.0, 'max_ratio': None, 'ok': False}
    path.write_text(json.dumps(summary), encoding='utf-8')
    assert main(['report', str(path)]) == 1
    assert capsys.readouterr().out.splitlines()[1] == f'{path} 3 2 1.0000 - no'


def test_errors(tmp_path):
    # type: (Any) -> None
    """Test that library errors become exit status 2."""
    assert main(['run', '--epsilon', '1.5']) == 2
    assert main(['run', '--algo', 'level-greedy', '--transform', 'hf', '--epsilon', '0.3', '--length', '5']) == 2
    path = tmp_path / 'bad.txt'
    path.write_text('setcover v2 n=1 C=1\n', encoding='utf-8')
    assert main(['solve-static', '--in', str(path)]) == 2
