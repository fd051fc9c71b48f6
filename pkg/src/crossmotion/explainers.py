# ===========================================
# Module: Explanations of Experiments
# Last Modified: 16 Oct 2026
# ===========================================
from .enums import Experiment

# ---------------------------------
#   Overview
# ---------------------------------
explain_overview = """
Every experiment uses the same user-split hold-out scheme. The participants of a dataset are \
shuffled and split into five groups. Each group is the test set of one fold, so every user is \
tested once and trained on four times. Normalization, pretext training and classifier training \
only ever see the training users of a fold. Scores are the mean and standard deviation over the \
five folds.
"""

# ---------------------
#   Pretext task
# ---------------------
explain_pretext = """
The pretext network sees a window of tri-axial acceleration whose last z samples are replaced by a \
mask value, and predicts the hidden z samples from x, y and the visible part of z. No activity \
labels are used. Quality is the R2 of the predicted z tail on the test users, pooled over every \
predicted sample.
"""

# ---------------------
#   Downstream task
# ---------------------
explain_ss_frozen = """
The convolution blocks of the trained pretext network are copied into the activity classifier and \
frozen. Only the fully connected head is trained on labeled windows.
"""

explain_ss_finetune = """
The frozen-transfer classifier is trained further with every layer unfrozen, at the downstream \
learning rate.
"""

explain_supervised = """
The classifier architecture is trained end-to-end from a random initialization, without the \
pretext network. This is the fully-supervised reference.
"""

explain_ablation = """
Both the frozen-transfer classifier (SS) and the fully-supervised classifier (FS) are trained on \
the same stratified subset of the labeled training windows. The pretext network still uses every \
training window, since it needs no labels.
"""

# ---------------------
#   Metrics
# ---------------------
explain_metrics = """
Accuracy is the share of correctly classified test windows. F1(m) is the unweighted mean of the \
per-class F1 scores. F1(w) weights each class by its number of test windows, so rare classes \
pull F1(m) down more than F1(w).
"""

EXPERIMENT_TEXT = {Experiment.pretext: explain_pretext,
                   Experiment.ss_frozen: explain_ss_frozen,
                   Experiment.ss_finetune: explain_ss_finetune,
                   Experiment.supervised: explain_supervised,
                   Experiment.ablation_1pct: explain_ablation}

METHOD_NAMES = {Experiment.ss_frozen: 'Self-supervised (frozen)',
                Experiment.ss_finetune: 'Self-supervised (fine-tuned)',
                Experiment.supervised: 'Fully supervised'}


def explain(experiment: Experiment):
    """Description paragraph of an experiment, whitespace-trimmed"""
    return EXPERIMENT_TEXT[experiment].strip()
