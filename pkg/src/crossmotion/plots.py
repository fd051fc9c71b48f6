# ==========================
# Module: Report Plots
# Last Modified: 16 Oct 2026
# ==========================
from pathlib import Path
from typing import Union

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402
import seaborn as sns  # noqa: E402

from .enums import DatasetName  # noqa: E402
from .training import TrainHistory  # noqa: E402

# Keep text as <text> elements so labels stay searchable in the SVG
plt.rcParams['svg.fonttype'] = 'none'
plt.rcParams['svg.hashsalt'] = 'crossmotion'


def _save_svg(fig, path: Union[str, Path]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format='svg', bbox_inches='tight', metadata={'Date': None})
    plt.close(fig)
    return path


# ---------------------
#   Label fractions
# ---------------------
def plot_ablation(frame: pd.DataFrame,
                  path: Union[str, Path]):
    """Grouped bar chart of accuracy, one bar group per dataset and one bar per
    (regime, label fraction) pair

    Args:
        frame (pd.DataFrame): Rows with columns dataset, regime (SS/FS), label_fraction, accuracy
        path (str or Path): Destination SVG

    Returns:
        Path: The written SVG
    """
    sns.set_style('white')
    data = frame.copy()
    order = [d.display_name for d in DatasetName if d.display_name in set(data['dataset'])]
    data['setting'] = [f'{r} ({f * 100:g}% labels)' for r, f in zip(data['regime'], data['label_fraction'])]
    hue_order = sorted(set(data['setting']), key=lambda s: (s.split(' ')[0] != 'SS', s))

    fig, ax = plt.subplots(1, 1, figsize=(7, 4))
    sns.barplot(data=data,
                x='dataset',
                y='accuracy',
                hue='setting',
                order=order,
                hue_order=hue_order,
                palette='Greys',
                edgecolor='black',
                ax=ax)
    ax.set(xlabel='', ylabel='Accuracy', ylim=(0, 1))
    ax.legend(title='', loc='lower right', fontsize='small')

    return _save_svg(fig, path)


# ---------------------
#   Training curves
# ---------------------
def plot_history(history: TrainHistory,
                 path: Union[str, Path],
                 title: str = ''):
    """Training and validation loss per epoch, with the selected epoch marked"""
    sns.set_style('white')
    epochs = [r.epoch + 1 for r in history.records]

    fig, ax = plt.subplots(1, 1, figsize=(6, 4))
    ax.plot(epochs, [r.train_loss for r in history.records], color='gray', label='train loss')
    ax.plot(epochs, [r.val_loss for r in history.records], color='black', linestyle='dashed', label='validation loss')
    if history.best_epoch >= 0:
        plt.axvline(x=history.best_epoch + 1, color='red', linestyle='dotted')
    ax.set(xlabel='Epoch', ylabel='Loss', title=title or history.regime)
    ax.legend()

    return _save_svg(fig, path)
