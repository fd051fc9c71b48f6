import numpy as np
import pytest

from crossmotion.checkpoint import read_checkpoint_record
from crossmotion.datasets import WindowSet, fit_minmax, load_windows
from crossmotion.enums import DatasetName, Experiment
from crossmotion.exceptions import ProtocolError
from crossmotion.protocol import (Fold, FoldResult, ResultTable,
                                  check_result_table, evaluate_checkpoints,
                                  make_user_folds, prepare_fold,
                                  record_mismatches, required_checkpoints,
                                  result_filename, run_protocol, split_fold)


DATASET_ROOTS = [(DatasetName.ucihar, 'ucihar_root'),
                 (DatasetName.motionsense, 'motionsense_root'),
                 (DatasetName.hapt, 'hapt_root')]


@pytest.fixture
def small_run(small_ucihar_root, tiny_config):
    config = tiny_config.merged({'root': str(small_ucihar_root)})
    return load_windows(DatasetName.ucihar, small_ucihar_root, window_length=40), config


# ---------------------
#     Fold plans
# ---------------------
def test_thirty_subjects_give_five_folds_of_six():
    plan = make_user_folds(np.repeat(np.arange(1, 31), 4), seed=0)

    assert [len(f.test_subjects) for f in plan] == [6] * 5
    assert plan.subjects == list(range(1, 31))
    for fold in plan:
        assert not set(fold.test_subjects) & set(fold.train_subjects)
        assert len(fold.train_subjects) == 24


def test_twenty_four_subjects_split_near_equally():
    plan = make_user_folds(np.arange(1, 25), seed=1)

    assert sorted(len(f.test_subjects) for f in plan) == [4, 5, 5, 5, 5]
    assert plan.subjects == list(range(1, 25))


def test_fold_plan_depends_only_on_the_seed():
    subjects = np.arange(1, 31)

    assert make_user_folds(subjects, seed=5).to_dict() == make_user_folds(subjects[::-1], seed=5).to_dict()
    assert make_user_folds(subjects, seed=5).to_dict() != make_user_folds(subjects, seed=6).to_dict()


def test_too_few_subjects_for_the_folds():
    with pytest.raises(ProtocolError):
        make_user_folds([1, 2, 3, 4], seed=0)


# ---------------------
#    Fold data
# ---------------------
def test_split_fold_rejects_shared_subjects(labeled_windows):
    fold = Fold(index=0, test_subjects=[1, 2], train_subjects=[2, 3, 4, 5], validation_seed=0)

    with pytest.raises(ProtocolError):
        split_fold(labeled_windows, fold)


def test_split_fold_rejects_subjects_outside_the_plan(labeled_windows):
    fold = Fold(index=0, test_subjects=[1], train_subjects=[2, 3, 4], validation_seed=0)

    with pytest.raises(ProtocolError):
        split_fold(labeled_windows, fold)


def test_normalization_is_fitted_on_training_users_only(small_run):
    windows, config = small_run
    fold = next(iter(make_user_folds(windows.subject_ids, config.seed)))
    data = prepare_fold(windows, fold, config)
    reference = fit_minmax(windows.for_subjects(fold.train_subjects))

    np.testing.assert_array_equal(data.normalization.minimum, reference.minimum)
    np.testing.assert_array_equal(data.normalization.maximum, reference.maximum)
    assert set(data.test.subjects) == set(fold.test_subjects)
    assert set(data.train.subjects) | set(data.validation.subjects) <= set(fold.train_subjects)
    assert len(data.train) + len(data.validation) == len(windows.for_subjects(fold.train_subjects))


# ---------------------
#    Result tables
# ---------------------
def _table(accuracies):
    folds = [FoldResult(fold=i, test_subjects=[i + 1], metrics={'accuracy': a, 'f1_macro': a, 'f1_weighted': a})
             for i, a in enumerate(accuracies)]
    return ResultTable(dataset='ucihar', experiment='ss_frozen', seed=0, folds=folds)


def test_result_table_summary_uses_population_std():
    table = _table([0.8, 1.0])

    assert table.mean('accuracy') == pytest.approx(0.9)
    assert table.std('accuracy') == pytest.approx(0.1)
    assert table.to_dict()['summary']['accuracy']['std'] == pytest.approx(0.1)


def test_result_table_json_round_trip(tmp_path):
    table = _table([0.7, 0.75, 0.9])
    loaded = ResultTable.from_json(table.to_json(tmp_path / 'results_ss_frozen.json'))

    assert loaded.to_dict() == table.to_dict()


def test_result_filenames():
    assert result_filename(Experiment.ss_frozen) == 'results_ss_frozen.json'
    assert result_filename(Experiment.ablation_1pct, 0.01) == 'results_ablation_0.01.json'


def test_check_result_table_detects_inconsistent_scalars():
    table = _table([1.0])
    table.folds[0].confusion = {'har': [[2, 0], [0, 2]]}
    assert check_result_table(table)

    table.folds[0].metrics['accuracy'] = 0.5
    with pytest.raises(ProtocolError):
        check_result_table(table)


# ---------------------
#   Full protocol runs
# ---------------------
def test_frozen_protocol_is_complete_and_reproducible(tmp_path, small_run):
    windows, config = small_run
    first = run_protocol(windows, Experiment.ss_frozen, config, tmp_path / 'a', reuse=False)
    second = run_protocol(windows, Experiment.ss_frozen, config, tmp_path / 'b', reuse=False)

    assert len(first.folds) == 5
    assert sorted(s for f in first.folds for s in f.test_subjects) == [1, 2, 3, 4, 5]
    assert check_result_table(first)
    assert first.to_json(tmp_path / 'a.json').read_bytes() == second.to_json(tmp_path / 'b.json').read_bytes()
    for k in range(5):
        fold_dir = tmp_path / 'a' / f'fold_{k}'
        assert (fold_dir / 'pretext.ckpt').exists()
        assert (fold_dir / 'har_frozen.ckpt').exists()
        assert (fold_dir / 'normalization.json').exists()
        assert (fold_dir / 'har_frozen.history.jsonl').exists()
    assert (tmp_path / 'a' / 'folds.json').exists()


def test_saved_checkpoints_reproduce_the_results(tmp_path, small_run):
    windows, config = small_run
    table = run_protocol(windows, Experiment.ss_frozen, config, tmp_path)
    evaluated = evaluate_checkpoints(windows, Experiment.ss_frozen, config, tmp_path)

    for trained, restored in zip(table.folds, evaluated.folds):
        assert restored.metrics == pytest.approx(trained.metrics)


def test_evaluation_without_checkpoints_names_the_missing_files(tmp_path, small_run):
    windows, config = small_run

    with pytest.raises(FileNotFoundError) as e:
        evaluate_checkpoints(windows, Experiment.supervised, config, tmp_path)
    assert 'fold_0' in str(e.value)
    assert 'har_supervised.ckpt' in str(e.value)


def test_pretext_protocol_reports_regression_metrics(tmp_path, small_run):
    windows, config = small_run
    table = run_protocol(windows, Experiment.pretext, config, tmp_path)

    assert table.metric_names == ['r2', 'mse']
    assert all(np.isfinite(f.metrics['r2']) for f in table.folds)


def test_ablation_protocol_trains_both_arms_on_the_subset(tmp_path, small_run):
    windows, config = small_run
    table = run_protocol(windows, Experiment.ablation_1pct, config, tmp_path)

    assert table.label_fraction == 0.01
    assert set(table.metric_names) == {'ss_accuracy', 'ss_f1_macro', 'ss_f1_weighted',
                                       'fs_accuracy', 'fs_f1_macro', 'fs_f1_weighted'}
    assert set(table.folds[0].confusion) == {'ss', 'fs'}
    assert check_result_table(table)
    assert (tmp_path / 'fold_0' / 'ablation_ss_0.01.ckpt').exists()
    assert (tmp_path / 'fold_0' / 'ablation_fs_0.01.ckpt').exists()


def test_unlabeled_windows_only_feed_the_pretext_task(tmp_path, small_run):
    windows, config = small_run
    labels = windows.labels.copy()
    labels[::7] = -1
    partly = WindowSet(windows=windows.windows, subject_ids=windows.subject_ids, labels=labels)
    table = run_protocol(partly, Experiment.ss_frozen, config, tmp_path)

    total = sum(int(np.sum(f.confusion['har'])) for f in table.folds)
    assert total == int(np.sum(labels >= 0))


@pytest.mark.parametrize('dataset, root_fixture', DATASET_ROOTS)
def test_fold_invariants_hold_on_every_dataset(dataset, root_fixture, tiny_config, request):
    root = request.getfixturevalue(root_fixture)
    windows = load_windows(dataset, root, window_length=40)
    config = tiny_config.merged({'dataset': dataset.name, 'root': str(root)})
    plan = make_user_folds(windows.subject_ids, config.seed)

    assert plan.subjects == windows.subjects
    tested = 0
    for fold in plan:
        data = prepare_fold(windows, fold, config)
        reference = fit_minmax(windows.for_subjects(fold.train_subjects))
        np.testing.assert_array_equal(data.normalization.minimum, reference.minimum)
        assert not set(data.test.subjects) & (set(data.train.subjects) | set(data.validation.subjects))
        tested += len(data.test)
    assert tested == len(windows)


# ---------------------
#   Checkpoint reuse
# ---------------------
def test_record_mismatches_name_the_changed_settings():
    fold = {'seed': 0, 'test_subjects': [1], 'train_subjects': [2, 3]}
    stored = {'fold': fold, 'stage': 'pretext', 'train': {'epochs': 1}, 'label_fraction': None,
              'upstream': None}

    assert record_mismatches(stored, stored) == []
    assert record_mismatches(None, stored) == ['stage record']
    assert record_mismatches(stored, {**stored, 'fold': {**fold, 'seed': 1}}) == ['fold.seed']
    assert record_mismatches(stored, {**stored, 'train': {'epochs': 2}}) == ['train']
    assert record_mismatches(stored, {**stored, 'train': {'epochs': 2}}, compare_training=False) == []

    classifier = {**stored, 'stage': 'downstream', 'upstream': {**stored, 'fold': {**fold, 'seed': 1}}}
    assert record_mismatches(classifier, {**classifier, 'upstream': None}) == ['upstream pretext fold']


def test_checkpoints_of_another_fold_plan_are_retrained(tmp_path, small_run):
    windows, config = small_run
    run_protocol(windows, Experiment.pretext, config, tmp_path)
    reseeded = config.merged({'seed': 1})
    run_protocol(windows, Experiment.ss_frozen, reseeded, tmp_path)

    for fold in make_user_folds(windows.subject_ids, reseeded.seed):
        pretext = read_checkpoint_record(tmp_path / f'fold_{fold.index}' / 'pretext.ckpt')
        frozen = read_checkpoint_record(tmp_path / f'fold_{fold.index}' / 'har_frozen.ckpt')
        assert pretext['fold']['seed'] == 1
        assert pretext['fold']['test_subjects'] == fold.test_subjects
        assert not set(pretext['fold']['train_subjects']) & set(fold.test_subjects)
        assert frozen['upstream'] == pretext


def test_upstream_pretext_is_reused_across_training_settings(tmp_path, small_run):
    windows, config = small_run
    run_protocol(windows, Experiment.pretext, config, tmp_path)
    before = (tmp_path / 'fold_0' / 'pretext.ckpt').read_bytes()
    longer = config.merged({'pretext': {'epochs': 2}})

    run_protocol(windows, Experiment.ss_frozen, longer, tmp_path)
    assert (tmp_path / 'fold_0' / 'pretext.ckpt').read_bytes() == before

    run_protocol(windows, Experiment.pretext, longer, tmp_path)
    assert read_checkpoint_record(tmp_path / 'fold_0' / 'pretext.ckpt')['train']['epochs'] == 2


def test_evaluation_rejects_another_fold_plan(tmp_path, small_run):
    windows, config = small_run
    run_protocol(windows, Experiment.ss_frozen, config, tmp_path)

    with pytest.raises(ProtocolError) as e:
        evaluate_checkpoints(windows, Experiment.ss_frozen, config.merged({'seed': 1}), tmp_path)
    assert 'folds.json' in str(e.value)


def test_evaluation_rejects_checkpoints_of_other_data_settings(tmp_path, small_run):
    windows, config = small_run
    run_protocol(windows, Experiment.ss_frozen, config, tmp_path)

    with pytest.raises(ProtocolError) as e:
        evaluate_checkpoints(windows, Experiment.ss_frozen, config.merged({'mask_downstream': True}), tmp_path)
    assert 'mask_downstream' in str(e.value)


# ---------------------
#   Reproducibility
# ---------------------
@pytest.mark.parametrize('dataset, root_fixture', DATASET_ROOTS)
def test_results_are_byte_identical_on_every_dataset(tmp_path, dataset, root_fixture, tiny_config, request):
    root = request.getfixturevalue(root_fixture)
    windows = load_windows(dataset, root, window_length=40)
    config = tiny_config.merged({'dataset': dataset.name, 'root': str(root)})
    first, second = [run_protocol(windows, Experiment.ss_frozen, config, tmp_path / run, reuse=False)
                     .to_json(tmp_path / f'{run}.json') for run in ('a', 'b')]

    assert first.read_bytes() == second.read_bytes()


@pytest.mark.parametrize('experiment', [Experiment.ss_finetune, Experiment.supervised, Experiment.ablation_1pct])
def test_every_regime_is_byte_reproducible(tmp_path, small_run, experiment):
    windows, config = small_run
    first, second = [run_protocol(windows, experiment, config, tmp_path / run, reuse=False)
                     .to_json(tmp_path / f'{run}.json') for run in ('a', 'b')]

    assert first.read_bytes() == second.read_bytes()
    for name in required_checkpoints(experiment, config.label_fraction):
        assert (tmp_path / 'a' / 'fold_0' / name).read_bytes() == (tmp_path / 'b' / 'fold_0' / name).read_bytes()
