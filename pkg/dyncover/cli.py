"""The dyncover command line."""

import json
import logging
import sys
from argparse import ArgumentParser, Namespace
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from .core import load_instance, save_instance, replay
from .errors import DyncoverError
from .harness import DEFAULT_EPSILON
from .harness import GeneratorKind, AlgorithmKind, TransformKind, OracleMode
from .harness import WorkloadSpec, ExperimentConfig, ExperimentResult
from .harness import generate, run_experiment, run_batch, solve_static
from .harness import write_csv, write_summary, write_plot_data
from .static_solvers import DEFAULT_NODE_BUDGET


LOGGER = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def _add_logging_arguments(parser):
    # type: (ArgumentParser) -> None
    parser.add_argument('-v', '--verbose', action='store_true', help='log progress (default: disabled)')
    parser.add_argument('-d', '--debug', action='store_true', help='enable debug logging (default: disabled)')


def _add_workload_arguments(parser):
    # type: (ArgumentParser) -> None
    parser.add_argument(
        '--generator', type=GeneratorKind, default=GeneratorKind.RANDOM,
        choices=list(GeneratorKind), metavar='{' + '|'.join(kind.value for kind in GeneratorKind) + '}',
        help='workload generator (default: random)',
    )
    parser.add_argument('-n', type=int, default=16, help='most elements alive at once (default: 16)')
    parser.add_argument('-m', type=int, default=12, help='number of sets (default: 12)')
    parser.add_argument('-f', type=int, default=3, help='frequency bound (default: 3)')
    parser.add_argument('-C', '--aspect-ratio', type=float, default=1.0, help='cost aspect ratio (default: 1)')
    parser.add_argument('--length', type=int, default=500, help='number of updates (default: 500)')
    parser.add_argument('--insert-ratio', type=float, default=0.6, help='insertion probability (default: 0.6)')
    parser.add_argument('--num-elements', type=int, default=None, help='distinct element ids (default: n)')
    parser.add_argument('--max-set-size', type=int, default=None, help='largest set size (default: ids / 2)')
    parser.add_argument('--delta', type=float, default=0.25, help='attack fraction (default: 0.25)')
    parser.add_argument('--seed', type=int, default=0, help='random seed (default: 0)')


def _add_experiment_arguments(parser):
    # type: (ArgumentParser) -> None
    parser.add_argument('--in', dest='instance', default=None, help='instance file (default: generate one)')
    parser.add_argument(
        '--algo', type=AlgorithmKind, default=AlgorithmKind.RECOMPUTE,
        choices=list(AlgorithmKind), metavar='{' + '|'.join(kind.value for kind in AlgorithmKind) + '}',
        help='background algorithm (default: recompute)',
    )
    parser.add_argument(
        '--transform', type=TransformKind, default=TransformKind.LF,
        choices=list(TransformKind), metavar='{none|lf|hf}',
        help='recourse transform (default: lf)',
    )
    parser.add_argument('--epsilon', type=float, default=DEFAULT_EPSILON, help=f'accuracy (default: {DEFAULT_EPSILON})')
    parser.add_argument('--strict-naive', action='store_true', help='add a set for every insertion')
    parser.add_argument(
        '--oracle', type=OracleMode, default=OracleMode.AUTO,
        choices=list(OracleMode), metavar='{auto|exact|dual|off}',
        help='how optima are estimated (default: auto)',
    )
    parser.add_argument('--audit-every', type=int, default=1, help='audit every k steps, 0 for never (default: 1)')
    parser.add_argument(
        '--node-budget', type=int, default=DEFAULT_NODE_BUDGET,
        help=f'exact search node budget (default: {DEFAULT_NODE_BUDGET})',
    )


def build_parser():
    # type: () -> ArgumentParser
    """Build the argument parser."""
    parser = ArgumentParser(prog='dyncover', description='Dynamic set cover with bounded recourse.')
    _add_logging_arguments(parser)
    subparsers = parser.add_subparsers(dest='command', required=True)

    gen_parser = subparsers.add_parser('gen', help='generate an instance and trace')
    _add_workload_arguments(gen_parser)
    gen_parser.add_argument('--out', required=True, help='instance file to write (.json for JSON)')

    run_parser = subparsers.add_parser('run', help='replay a trace through a pipeline')
    _add_workload_arguments(run_parser)
    _add_experiment_arguments(run_parser)
    run_parser.add_argument('--out', default=None, help='per-step CSV (default: none)')
    run_parser.add_argument('--summary', default=None, help='summary JSON (default: stdout)')
    run_parser.add_argument('--plot', default=None, help='gnuplot data file (default: none)')

    static_parser = subparsers.add_parser('solve-static', help='solve the universe at the end of a trace')
    static_parser.add_argument('--in', dest='instance', required=True, help='instance file')
    static_parser.add_argument(
        '--algo', default='greedy', choices=['greedy', 'pd-all', 'pd-first', 'exact'],
        help='static algorithm (default: greedy)',
    )
    static_parser.add_argument(
        '--node-budget', type=int, default=DEFAULT_NODE_BUDGET,
        help=f'exact search node budget (default: {DEFAULT_NODE_BUDGET})',
    )
    static_parser.add_argument('--out', default=None, help='report JSON (default: stdout)')

    check_parser = subparsers.add_parser('check', help='run many seeds and report failures')
    _add_workload_arguments(check_parser)
    _add_experiment_arguments(check_parser)
    check_parser.add_argument('--seeds', type=int, default=10, help='number of seeds (default: 10)')
    check_parser.add_argument('--workers', type=int, default=1, help='worker processes (default: 1)')

    report_parser = subparsers.add_parser('report', help='tabulate summary files')
    report_parser.add_argument('summaries', nargs='+', help='summary JSON files')
    return parser


def configure_logging(args):
    # type: (Namespace) -> None
    """Set the root log level from the flags."""
    if args.debug:
        level = logging.DEBUG
    elif args.verbose:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)


def workload_from_args(args):
    # type: (Namespace) -> WorkloadSpec
    """Build a WorkloadSpec from parsed flags."""
    return WorkloadSpec(
        generator=args.generator,
        n=args.n,
        m=args.m,
        f=args.f,
        aspect_ratio=args.aspect_ratio,
        length=args.length,
        insert_ratio=args.insert_ratio,
        seed=args.seed,
        num_elements=args.num_elements,
        max_set_size=args.max_set_size,
        delta=args.delta,
    )


def config_from_args(args):
    # type: (Namespace) -> ExperimentConfig
    """Build an ExperimentConfig from parsed flags."""
    return ExperimentConfig(
        workload=workload_from_args(args),
        instance=args.instance,
        algorithm=args.algo,
        transform=args.transform,
        epsilon=args.epsilon,
        strict_naive=args.strict_naive,
        oracle=args.oracle,
        audit_every=args.audit_every,
        node_budget=args.node_budget,
    )


def _write_json(data, path):
    # type: (object, Optional[str]) -> None
    text = json.dumps(data, indent=2)
    if path is None:
        print(text)
    else:
        Path(path).write_text(text + '\n', encoding='utf-8')


def _gen(args):
    # type: (Namespace) -> int
    system, trace = generate(workload_from_args(args))
    save_instance(args.out, system, trace)
    LOGGER.info('wrote %s with %d updates to %s', system, len(trace), args.out)
    return 0


def _run(args):
    # type: (Namespace) -> int
    result = run_experiment(config_from_args(args))
    if args.out is not None:
        write_csv(result, args.out)
    if args.plot is not None:
        write_plot_data(result, args.plot)
    if args.summary is not None:
        write_summary(result, args.summary)
    else:
        _write_json(result.summary(), None)
    return 0 if result.ok else 1


def _solve_static(args):
    # type: (Namespace) -> int
    system, trace = load_instance(args.instance)
    if trace:
        universe = sorted(replay(system, trace).alive)
    else:
        universe = list(range(system.num_elements))
    _write_json(solve_static(system, universe, args.algo, args.node_budget), args.out)
    return 0


def _summary_line(result):
    # type: (ExperimentResult) -> str
    ratio = result.max_ratio
    return ' '.join([
        f'seed={result.config.seed}',
        f'steps={len(result.reports)}',
        f'max_recourse={result.max_recourse}',
        f'max_ratio={ratio:.4f}' if ratio is not None else 'max_ratio=-',
        'ok' if result.ok else 'FAILED ' + ','.join(sorted(result.failed_properties())),
    ])


def _check(args):
    # type: (Namespace) -> int
    base = config_from_args(args)
    configs = [
        replace(base, workload=replace(base.workload, seed=args.seed + offset))
        for offset in range(args.seeds)
    ]
    results = run_batch(configs, args.workers)
    for result in results:
        print(_summary_line(result))
    failed = sum(1 for result in results if not result.ok)
    if failed:
        LOGGER.warning('%d of %d seeds failed', failed, len(results))
        return 1
    return 0


def _report(args):
    # type: (Namespace) -> int
    status = 0
    print('file steps max_recourse mean_recourse max_ratio ok')
    for path in args.summaries:
        summary = json.loads(Path(path).read_text(encoding='utf-8'))
        ratio = summary.get('max_ratio')
        print(' '.join([
            path,
            str(summary['steps']),
            str(summary['max_recourse']),
            f"{summary['mean_recourse']:.4f}",
            f'{ratio:.4f}' if ratio is not None else '-',
            'yes' if summary['ok'] else 'no',
        ]))
        if not summary['ok']:
            status = 1
    return status


COMMANDS = {
    'gen': _gen,
    'run': _run,
    'solve-static': _solve_static,
    'check': _check,
    'report': _report,
}


def main(argv=None):
    # type: (Optional[Sequence[str]]) -> int
    """Run the command line; return the exit status."""
    args = build_parser().parse_args(argv)
    configure_logging(args)
    try:
        return COMMANDS[args.command](args)
    except DyncoverError as error:
        LOGGER.error('%s: %s', type(error).__name__, error)
        return 2
