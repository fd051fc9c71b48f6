# ===============================
# Module: Report Generation
# Last Modified: 16 Oct 2026
# ===============================
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .datasets import activity_names
from .enums import DatasetName, Experiment
from .exceptions import ReportError
from .explainers import METHOD_NAMES, explain, explain_metrics, explain_overview
from .logger import logger
from .metrics import metrics_from_confusion
from .plots import plot_ablation, plot_history
from .protocol import ResultTable
from .training import read_history

ABLATION_COLUMNS = ['dataset', 'regime', 'label_fraction', 'accuracy']


def load_result_tables(paths: Sequence[Union[str, Path]]):
    """Read ResultTable JSON files

    Raises:
        ReportError: Listing every missing path
    """
    paths = [Path(p) for p in paths]
    missing = [str(p) for p in paths if not p.exists()]
    if missing:
        raise ReportError(f'Missing report inputs: {", ".join(missing)}')
    if not paths:
        raise ReportError('No result tables given to the report')

    return [ResultTable.from_json(p) for p in paths]


def find_result_files(run_dirs: Sequence[Union[str, Path]]):
    """results_*.json files of one or more run directories (a file path is taken as is)"""
    files, missing = [], []
    for entry in map(Path, run_dirs):
        if entry.is_file():
            files.append(entry)
        elif entry.is_dir():
            found = sorted(entry.glob('results_*.json'))
            if not found:
                missing.append(str(entry / 'results_*.json'))
            files.extend(found)
        else:
            missing.append(str(entry))
    if missing:
        raise ReportError(f'Missing report inputs: {", ".join(missing)}')

    return files


def format_result_cells(summary: Dict[str, Tuple[float, float]],
                        prefix: str = ''):
    """'accuracy ± std / F1(m) / F1(w)' with three decimals"""
    acc_mean, acc_std = summary[f'{prefix}accuracy']
    return (f'{acc_mean:.3f} ± {acc_std:.3f} / {summary[f"{prefix}f1_macro"][0]:.3f} / '
            f'{summary[f"{prefix}f1_weighted"][0]:.3f}')


def _dataset_label(name: str):
    return DatasetName.from_str(name).display_name


def ablation_frame(tables: Sequence[ResultTable]):
    """Accuracy per dataset, regime (SS/FS) and label fraction

    Label-fraction tables contribute both arms. Full-label ss_frozen and supervised tables
    fill in the 100% rows when no label-fraction table covers them.
    """
    rows = {}
    for table in tables:
        experiment = Experiment.from_str(table.experiment)
        dataset = _dataset_label(table.dataset)
        if experiment == Experiment.ablation_1pct:
            for regime in ('SS', 'FS'):
                rows[(dataset, regime, table.label_fraction)] = table.mean(f'{regime.lower()}_accuracy')
    for table in tables:
        experiment = Experiment.from_str(table.experiment)
        regime = {Experiment.ss_frozen: 'SS', Experiment.supervised: 'FS'}.get(experiment)
        if regime is not None:
            rows.setdefault((_dataset_label(table.dataset), regime, 1.0), table.mean('accuracy'))

    order = {d.display_name: i for i, d in enumerate(DatasetName)}
    keys = sorted(rows, key=lambda k: (order[k[0]], k[1] != 'SS', k[2]))

    return pd.DataFrame([[*k, rows[k]] for k in keys], columns=ABLATION_COLUMNS)


def per_class_f1_frame(tables: Sequence[ResultTable]):
    """F1 per activity (rows) and method (columns) from the confusion matrices pooled over folds

    Tables without stored confusion matrices are left out; None if none remain.
    """
    columns = {}
    for table in sorted(tables, key=lambda t: Experiment.from_str(t.experiment)):
        experiment = Experiment.from_str(table.experiment)
        if experiment not in METHOD_NAMES or not table.folds or any('har' not in f.confusion for f in table.folds):
            continue
        pooled = np.sum([np.asarray(f.confusion['har']) for f in table.folds], axis=0)
        columns[METHOD_NAMES[experiment]] = metrics_from_confusion(pooled).per_class_f1
    if not columns:
        return None

    names = activity_names(DatasetName.from_str(tables[0].dataset))
    return pd.DataFrame(columns, index=pd.Index(names, name='activity'))


def markdown_report(tables: Sequence[ResultTable]):
    """Markdown result tables per dataset (Method | Accuracy / F1(m) / F1(w)), pretext R2 lines
    and a label-fraction table"""
    lines = ['# Results', '', explain_overview.strip(), '', explain_metrics.strip(), '']
    for dataset in DatasetName:
        own = [t for t in tables if DatasetName.from_str(t.dataset) == dataset]
        if not own:
            continue
        lines += [f'## {dataset.display_name}', '']
        for table in own:
            if Experiment.from_str(table.experiment) == Experiment.pretext:
                r2_mean, r2_std = table.summary()['r2']
                lines += [f'Motion prediction R2 on test users: {r2_mean:.3f} ± {r2_std:.3f}', '',
                          explain(Experiment.pretext), '']

        rows = [t for t in own if Experiment.from_str(t.experiment) in METHOD_NAMES]
        if rows:
            lines += ['| Method | Accuracy / F1(m) / F1(w) |', '|---|---|']
            for table in sorted(rows, key=lambda t: Experiment.from_str(t.experiment)):
                name = METHOD_NAMES[Experiment.from_str(table.experiment)]
                lines.append(f'| {name} | {format_result_cells(table.summary())} |')
            lines.append('')
            for table in sorted(rows, key=lambda t: Experiment.from_str(t.experiment)):
                experiment = Experiment.from_str(table.experiment)
                lines.append(f'- **{METHOD_NAMES[experiment]}**: {explain(experiment)}')
            lines.append('')

        per_class = per_class_f1_frame(rows)
        if per_class is not None:
            lines += ['| Activity F1 | ' + ' | '.join(per_class.columns) + ' |',
                      '|---|' + '---|' * len(per_class.columns)]
            for activity, scores in per_class.iterrows():
                lines.append(f'| {activity} | ' + ' | '.join(f'{s:.3f}' for s in scores) + ' |')
            lines.append('')

        for table in sorted((t for t in own if Experiment.from_str(t.experiment) == Experiment.ablation_1pct),
                            key=lambda t: t.label_fraction):
            summary = table.summary()
            lines += [f'### {table.label_fraction * 100:g}% of the labels', '', explain(Experiment.ablation_1pct), '',
                      '| Method | Accuracy / F1(m) / F1(w) |', '|---|---|',
                      f'| Self-supervised (frozen) | {format_result_cells(summary, "ss_")} |',
                      f'| Fully supervised | {format_result_cells(summary, "fs_")} |', '']

    return '\n'.join(lines).rstrip() + '\n'


def emit_report(inputs: Sequence[Union[str, Path]],
                out_dir: Union[str, Path],
                history_files: Optional[Sequence[Union[str, Path]]] = None):
    """Write report.md, ablation.csv, ablation.svg and per-stage loss curves

    Args:
        inputs (list): ResultTable JSON files or run directories holding results_*.json
        out_dir (str or Path): Report directory
        history_files (list, optional): Training-history JSON-lines files to plot

    Raises:
        ReportError: If any input is missing

    Returns:
        dict: Artifact name -> written path
    """
    tables = load_result_tables(find_result_files(inputs))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: Dict[str, Path] = {}

    report_path = out_dir / 'report.md'
    report_path.write_text(markdown_report(tables), encoding='utf-8')
    written['report'] = report_path

    frame = ablation_frame(tables)
    csv_path = out_dir / 'ablation.csv'
    frame.to_csv(csv_path, index=False, float_format='%.6f')
    written['ablation_csv'] = csv_path
    if len(frame):
        written['ablation_svg'] = plot_ablation(pd.read_csv(csv_path), out_dir / 'ablation.svg')
    else:
        logger.info('[+] No label-fraction results: skipping the ablation chart')

    for path in map(Path, history_files or []):
        name = f'{path.parent.name}_{path.name.split(".")[0]}'
        written[f'history_{name}'] = plot_history(read_history(path), out_dir / 'history' / f'{name}.svg',
                                                  title=name.replace('_', ' '))

    logger.info(f'[+] Report written to {out_dir} ({len(tables)} result tables)')
    return written


def history_files_of(run_dirs: Sequence[Union[str, Path]]) -> List[Path]:
    files = []
    for entry in map(Path, run_dirs):
        if entry.is_dir():
            files.extend(sorted(entry.glob('fold_*/*.history.jsonl')))
    return files
