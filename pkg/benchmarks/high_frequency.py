#!/usr/bin/env python3

import sys
from argparse import ArgumentParser
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from dyncover.harness import AlgorithmKind, TransformKind, OracleMode
from dyncover.harness import WorkloadSpec, ExperimentConfig, run_experiment
from dyncover.timing import get_msec


def main():
    arg_parser = ArgumentParser()
    arg_parser.add_argument('--length', type=int, default=10**5)
    arg_parser.add_argument('--seed', type=int, default=0)
    arg_parser.add_argument('--budget-sec', type=float, default=60)
    args = arg_parser.parse_args()
    config = ExperimentConfig(
        workload=WorkloadSpec(
            n=4096, m=8192, f=8, length=args.length, seed=args.seed,
            num_elements=8192, max_set_size=16,
        ),
        algorithm=AlgorithmKind.LEVEL_GREEDY,
        transform=TransformKind.HF,
        epsilon=0.2,
        oracle=OracleMode.OFF,
        audit_every=0,
    )
    start_msec = get_msec()
    result = run_experiment(config)
    elapsed_sec = (get_msec() - start_msec) / 1000
    print(' '.join([
        f'updates={len(result.reports)}',
        f'elapsed_sec={elapsed_sec:.1f}',
        f'nsec_per_update={result.nsec_per_update:.0f}',
        f'max_recourse={result.max_recourse}',
        f'work={result.work_counter}',
        'ok' if result.ok else 'FAILED',
    ]))
    assert result.ok, [str(failure) for failure in result.failures[:5]]
    assert len(result.reports) == args.length
    assert elapsed_sec < args.budget_sec, f'{elapsed_sec:.1f}s exceeds the {args.budget_sec}s budget'


if __name__ == '__main__':
    main()
