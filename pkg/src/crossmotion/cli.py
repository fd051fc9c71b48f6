# ==========================
# Module: Command Line
# Last Modified: 16 Oct 2026
# ==========================
import argparse
import sys
from datetime import datetime
from pathlib import Path
from typing import List, Optional

from . import __version__
from .config import RunConfig, load_config
from .datasets import (WindowSet, cache_is_valid, check_roster, load_window_cache,
                       load_windows, save_window_cache)
from .enums import DatasetName, Experiment, ValidationSplit
from .exceptions import CrossMotionError
from .logger import logger, setup_logging
from .protocol import evaluate_checkpoints, result_filename, run_protocol
from .reports import emit_report, history_files_of
from .utils import write_json

PROG = 'crossmotion'

# Subcommand -> (experiment, stage whose training flags apply)
TRAINING_COMMANDS = {'pretrain': (Experiment.pretext, 'pretext'),
                     'train-har': (Experiment.ss_frozen, 'downstream'),
                     'finetune': (Experiment.ss_finetune, 'finetune'),
                     'baseline': (Experiment.supervised, 'baseline')}


def _common_arguments(parser: argparse.ArgumentParser):
    parser.add_argument('--config', type=str, default=None, help='JSON config file')
    parser.add_argument('--out', type=str, default=None, help='Output directory (default ./runs/<timestamp>)')
    parser.add_argument('--dataset', type=str, default=None, choices=DatasetName.list_str())
    parser.add_argument('--root', type=str, default=None, help='Dataset root (default $CDMP_DATA_ROOT)')
    parser.add_argument('--seed', type=int, default=None)
    parser.add_argument('--window-length', type=int, default=None)
    parser.add_argument('--horizon', type=int, default=None)
    parser.add_argument('--stride', type=int, default=None)
    parser.add_argument('--workers', type=int, default=None, help='Parallel dataset file readers')
    parser.add_argument('--validation-split', type=str, default=None, choices=ValidationSplit.list_str())
    parser.add_argument('--output-activation', type=str, default=None, choices=['sigmoid', 'softmax'])
    parser.add_argument('--mask-downstream', action=argparse.BooleanOptionalAction, default=None,
                        help='Mask the z tail of classifier inputs as in the pretext task')
    parser.add_argument('--verbose', action='store_true', help='Debug logging')


def _training_arguments(parser: argparse.ArgumentParser):
    parser.add_argument('--epochs', type=int, default=None)
    parser.add_argument('--batch-size', type=int, default=None)
    parser.add_argument('--learning-rate', type=float, default=None)
    parser.add_argument('--no-reuse', action='store_true', help='Retrain stages even if checkpoints exist')


def build_parser():
    parser = argparse.ArgumentParser(prog=PROG,
                                     description='Self-supervised motion prediction for activity recognition')
    parser.add_argument('--version', action='version', version=f'{PROG} {__version__}')
    subparsers = parser.add_subparsers(dest='command', metavar='command')
    subparsers.required = True

    prepare = subparsers.add_parser('prepare', help='Ingest a dataset into the window cache')
    _common_arguments(prepare)
    prepare.add_argument('--strict-roster', action='store_true',
                         help='Fail if subject or class counts differ from the documented roster')

    for name, (experiment, _) in TRAINING_COMMANDS.items():
        sub = subparsers.add_parser(name, help=f'Run the {experiment.name} experiment over all folds')
        _common_arguments(sub)
        _training_arguments(sub)

    ablate = subparsers.add_parser('ablate', help='Train SS and FS classifiers on a label fraction')
    _common_arguments(ablate)
    _training_arguments(ablate)
    ablate.add_argument('--label-fraction', type=float, default=None)

    evaluate = subparsers.add_parser('eval', help='Re-evaluate saved fold checkpoints')
    _common_arguments(evaluate)
    evaluate.add_argument('--experiment', type=str, default=Experiment.ss_frozen.name,
                          choices=Experiment.list_str())
    evaluate.add_argument('--label-fraction', type=float, default=None)

    report = subparsers.add_parser('report', help='Emit markdown tables, ablation CSV and charts')
    report.add_argument('inputs', nargs='*', help='Run directories or results_*.json files (default --out)')
    report.add_argument('--out', type=str, default=None)
    report.add_argument('--verbose', action='store_true')

    return parser


def resolve_config(args: argparse.Namespace):
    """Defaults, then the JSON config file, then command-line flags"""
    config = load_config(args.config) if getattr(args, 'config', None) else RunConfig()
    overrides = {'dataset': args.dataset,
                 'root': args.root,
                 'seed': args.seed,
                 'window_length': args.window_length,
                 'horizon': args.horizon,
                 'stride': args.stride,
                 'workers': args.workers,
                 'validation_split': args.validation_split,
                 'output_activation': args.output_activation,
                 'mask_downstream': args.mask_downstream,
                 'label_fraction': getattr(args, 'label_fraction', None)}

    stage_flags = {'epochs': getattr(args, 'epochs', None),
                   'batch_size': getattr(args, 'batch_size', None),
                   'learning_rate': getattr(args, 'learning_rate', None)}
    stage_flags = {k: v for k, v in stage_flags.items() if v is not None}
    if stage_flags:
        for stage in _stages_of(args.command):
            overrides[stage] = stage_flags

    config = config.merged(overrides)
    out_dir = args.out or config.out_dir or str(Path('runs') / datetime.now().strftime('%Y%m%d-%H%M%S'))
    return config.merged({'out_dir': out_dir})


def _stages_of(command: str):
    """Training stages a command runs (training flags apply to all of them)"""
    if command in TRAINING_COMMANDS:
        return [TRAINING_COMMANDS[command][1]]
    if command == 'ablate':
        return ['downstream', 'baseline']
    return []


def prepared_windows(config: RunConfig,
                     strict_roster: bool = False):
    """Windows of the configured dataset, from the run's cache when it is still valid"""
    root = config.data_root()
    cache_dir = Path(config.out_dir) / 'cache'
    if cache_is_valid(cache_dir, config.dataset, root, config.window_length, config.effective_stride):
        windows, _ = load_window_cache(cache_dir)
        logger.info(f'[+] Using window cache {cache_dir} ({len(windows)} windows)')
    else:
        windows = load_windows(config.dataset, root, config.window_length, config.stride, config.workers)
        save_window_cache(cache_dir, windows, config.dataset, root, config.effective_stride)
    check_roster(windows, config.dataset, strict=strict_roster)

    return windows


def _write_run_json(config: RunConfig, command: str, argv: List[str]):
    write_json(Path(config.out_dir) / 'run.json', {'command': command, 'argv': argv, 'config': config.to_dict()})


def _run_experiment(config: RunConfig,
                    experiment: Experiment,
                    windows: WindowSet,
                    reuse: bool,
                    evaluate_only: bool = False):
    out_dir = Path(config.out_dir)
    if evaluate_only:
        table = evaluate_checkpoints(windows, experiment, config, out_dir)
    else:
        table = run_protocol(windows, experiment, config, out_dir, reuse=reuse)
    path = table.to_json(out_dir / result_filename(experiment, config.label_fraction))
    logger.info(f'[+] Results written to {path}')
    return path


def run_command(argv: Optional[List[str]] = None):
    """Parse arguments and run one subcommand

    Returns:
        int: 0 on success, 1 on a run failure, 2 on a usage error
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    try:
        if args.command == 'report':
            out_dir = Path(args.out or '.')
            setup_logging(out_dir / f'{PROG}.log', level=10 if args.verbose else 20)
            inputs = args.inputs or [out_dir]
            emit_report(inputs, out_dir / 'report', history_files=history_files_of(inputs))
            return 0

        config = resolve_config(args)
        out_dir = Path(config.out_dir)
        setup_logging(out_dir / f'{PROG}.log', level=10 if args.verbose else 20)
        _write_run_json(config, args.command, argv)
        logger.info(f'[+] {args.command}: dataset {config.dataset.display_name}, seed {config.seed}, out {out_dir}')

        if args.command == 'prepare':
            prepared_windows(config, strict_roster=args.strict_roster)
            return 0

        windows = prepared_windows(config)
        if args.command in TRAINING_COMMANDS:
            _run_experiment(config, TRAINING_COMMANDS[args.command][0], windows, reuse=not args.no_reuse)
        elif args.command == 'ablate':
            _run_experiment(config, Experiment.ablation_1pct, windows, reuse=not args.no_reuse)
        elif args.command == 'eval':
            _run_experiment(config, Experiment.from_str(args.experiment), windows, reuse=True, evaluate_only=True)
        return 0

    except (CrossMotionError, FileNotFoundError, ValueError) as e:
        message = str(e).splitlines()[0] if str(e) else type(e).__name__
        print(f'{PROG}: error: {message}', file=sys.stderr)
        return 1


def main():
    sys.exit(run_command())


if __name__ == '__main__':
    main()
