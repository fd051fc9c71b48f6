import json

import pytest

from crossmotion.cli import build_parser, resolve_config, run_command
from crossmotion.config import DATA_ROOT_ENV, RunConfig, load_config
from crossmotion.enums import DatasetName, Regime
from crossmotion.exceptions import ConfigError
from crossmotion.logger import read_log_lines
from crossmotion.utils import read_json

TINY_FLAGS = ['--window-length', '40', '--horizon', '8', '--epochs', '1', '--batch-size', '32']


# ---------------------
#    Run configuration
# ---------------------
def test_defaults():
    config = RunConfig()

    assert config.dataset == DatasetName.ucihar
    assert (config.window_length, config.horizon, config.effective_stride) == (120, 24, 60)
    assert config.stage('pretext').learning_rate == 3e-4
    assert config.stage('finetune').regime == Regime.finetune
    assert config.label_fraction == 0.01


def test_unknown_keys_are_rejected():
    with pytest.raises(ConfigError) as e:
        RunConfig.from_dict({'learning_rat': 0.1})
    assert 'learning_rat' in str(e.value)

    with pytest.raises(ConfigError):
        RunConfig.from_dict({'pretext': {'epoch': 3}})


@pytest.mark.parametrize('payload', [{'window_length': 39}, {'horizon': 120}, {'dataset': 'wisdm'},
                                     {'output_activation': 'relu'}, {'label_fraction': 0.0}])
def test_out_of_range_values_are_rejected(payload):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(payload)


def test_merged_overrides_skip_none_and_keep_stage_defaults():
    config = RunConfig().merged({'seed': 7, 'horizon': None, 'downstream': {'epochs': 3}})

    assert config.seed == 7
    assert config.horizon == 24
    assert config.downstream.epochs == 3
    assert config.downstream.learning_rate == 1e-4


def test_config_document_round_trip(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps(RunConfig(seed=3, dataset=DatasetName.hapt).to_dict()))

    assert load_config(path).to_dict() == RunConfig(seed=3, dataset=DatasetName.hapt).to_dict()


def test_bad_json_config(tmp_path):
    path = tmp_path / 'bad.json'
    path.write_text('{"seed": ')

    with pytest.raises(ConfigError):
        load_config(path)


def test_data_root_comes_from_the_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(DATA_ROOT_ENV, str(tmp_path))
    assert RunConfig().data_root() == tmp_path

    monkeypatch.delenv(DATA_ROOT_ENV)
    with pytest.raises(ConfigError):
        RunConfig().data_root()


# ---------------------
#    Command line
# ---------------------
def test_prepare_writes_the_window_cache(tmp_path, ucihar_root):
    out = tmp_path / 'run'
    code = run_command(['prepare', '--root', str(ucihar_root), '--out', str(out), '--strict-roster'])
    manifest = read_json(out / 'cache' / 'manifest.json')

    assert code == 0
    assert manifest['subjects'] == list(range(1, 31))
    assert manifest['count'] == 180
    assert read_json(out / 'run.json')['command'] == 'prepare'
    assert any('Wrote window cache' in line for line in read_log_lines(out / 'crossmotion.log'))


def test_prepare_reads_the_root_from_the_environment(tmp_path, ucihar_root, monkeypatch):
    monkeypatch.setenv(DATA_ROOT_ENV, str(ucihar_root))

    assert run_command(['prepare', '--out', str(tmp_path / 'run')]) == 0


def test_missing_root_is_a_run_failure(tmp_path, monkeypatch, capsys):
    monkeypatch.delenv(DATA_ROOT_ENV, raising=False)

    assert run_command(['prepare', '--out', str(tmp_path / 'run')]) == 1
    assert DATA_ROOT_ENV in capsys.readouterr().err


def test_mask_flag_overrides_the_config_file_both_ways(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps({'mask_downstream': True}))
    parser = build_parser()

    def resolved(*flags):
        return resolve_config(parser.parse_args(['train-har', '--config', str(path), '--out', str(tmp_path), *flags]))

    assert resolved().mask_downstream is True
    assert resolved('--no-mask-downstream').mask_downstream is False
    path.write_text(json.dumps({}))
    assert resolved('--mask-downstream').mask_downstream is True


def test_usage_errors_exit_with_two(tmp_path):
    assert run_command(['pretrain', '--bogus']) == 2
    assert run_command(['prepare', '--dataset', 'wisdm']) == 2
    assert run_command([]) == 2


def test_unknown_config_key_is_a_run_failure(tmp_path, ucihar_root, capsys):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps({'learning_rat': 0.1}))

    assert run_command(['prepare', '--config', str(path), '--root', str(ucihar_root)]) == 1
    assert 'learning_rat' in capsys.readouterr().err


def test_eval_without_checkpoints_names_the_missing_file(tmp_path, small_ucihar_root, capsys):
    code = run_command(['eval', '--root', str(small_ucihar_root), '--out', str(tmp_path / 'run'),
                        '--window-length', '40', '--horizon', '8', '--experiment', 'ss_frozen'])

    assert code == 1
    assert 'har_frozen.ckpt' in capsys.readouterr().err


def test_train_evaluate_and_report(tmp_path, small_ucihar_root):
    out = tmp_path / 'run'
    common = ['--root', str(small_ucihar_root), '--out', str(out)]

    assert run_command(['pretrain', *common, *TINY_FLAGS]) == 0
    assert run_command(['train-har', *common, *TINY_FLAGS]) == 0
    trained = read_json(out / 'results_ss_frozen.json')
    assert read_json(out / 'run.json')['config']['downstream']['epochs'] == 1

    assert run_command(['eval', *common, '--window-length', '40', '--horizon', '8']) == 0
    evaluated = read_json(out / 'results_ss_frozen.json')
    assert evaluated['summary']['accuracy']['mean'] == pytest.approx(trained['summary']['accuracy']['mean'])

    assert run_command(['report', str(out), '--out', str(out)]) == 0
    report = (out / 'report' / 'report.md').read_text(encoding='utf-8')
    assert 'Motion prediction R2' in report
    assert 'Self-supervised (frozen)' in report
    assert (out / 'report' / 'ablation.csv').exists()
    assert list((out / 'report' / 'history').glob('*.svg'))
