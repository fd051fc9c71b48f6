import numpy as np
import pytest

from crossmotion.enums import Activation, LayerKind
from crossmotion.exceptions import ShapeError
from crossmotion.models import (ArchitectureSpec, LayerSpec, build_har_spec,
                                build_pretext_spec, forward, init_params,
                                predict, transfer_and_freeze, unfreeze)

PRETEXT_TRACE = [(118, 128), (116, 128), (58, 128),
                 (56, 256), (54, 256), (27, 256),
                 (25, 384), (23, 384), (11, 384),
                 (4224,), (384,), (120,), (24,)]


# ---------------------
#    Architectures
# ---------------------
def test_pretext_shape_trace():
    spec = build_pretext_spec()

    assert spec.input_shape == (120, 3)
    assert spec.shape_trace == PRETEXT_TRACE
    assert spec.layers[-1].activation == Activation.linear


def test_first_conv_parameter_count():
    params = init_params(build_pretext_spec(), seed=0)

    assert params.layers[0].size == 3 * 3 * 128 + 128 == 1280


def test_har_head_widths_and_dropout():
    spec = build_har_spec(6)
    dense = [layer for layer in spec.layers if layer.kind == LayerKind.dense]

    assert [layer.units for layer in dense] == [512, 250, 100, 6]
    assert [layer.dropout for layer in dense] == [0.2, 0.0, 0.0, 0.0]
    assert dense[-1].activation == Activation.sigmoid
    assert spec.output_shape == (6,)


def test_minimum_window_length_trace():
    spec = build_pretext_spec(window_length=40, horizon=8)

    assert spec.layers[spec.feature_stop - 1].output_shape == (384,)
    with pytest.raises(ShapeError):
        build_pretext_spec(window_length=30, horizon=8)


def test_har_spec_rejects_bad_arguments():
    with pytest.raises(ValueError):
        build_har_spec(1)
    with pytest.raises(ValueError):
        build_har_spec(6, output_activation=Activation.relu)


def test_conv_blocks_share_one_fingerprint():
    pretext, har = build_pretext_spec(), build_har_spec(12)

    assert pretext.conv_indices == har.conv_indices
    assert pretext.conv_fingerprint == har.conv_fingerprint
    assert pretext.fingerprint != har.fingerprint


def test_fingerprint_ignores_freeze_flags():
    assert build_har_spec(6, freeze_conv=True).fingerprint == build_har_spec(6, freeze_conv=False).fingerprint


def test_inconsistent_layer_list_is_rejected():
    layers = (LayerSpec(kind=LayerKind.dense, input_shape=(4,), output_shape=(3,), units=3),
              LayerSpec(kind=LayerKind.dense, input_shape=(5,), output_shape=(2,), units=2))

    with pytest.raises(ShapeError):
        ArchitectureSpec(name='broken', input_shape=(4,), layers=layers)


def test_summary_frame():
    summary = build_pretext_spec().summary()

    assert list(summary.columns) == ['Module', 'Layer Details', 'Feature Shape']
    assert summary['Feature Shape'].iloc[0] == '120 x 3'
    assert summary['Feature Shape'].iloc[-1] == '24'
    assert (summary['Module'] == 'Conv. Blocks').sum() == 10


# ---------------------
#     Transfer
# ---------------------
def test_transfer_copies_conv_weights_bit_identical():
    pretext = build_pretext_spec(window_length=40, horizon=8)
    har = build_har_spec(6, window_length=40)
    source = init_params(pretext, seed=1)
    params = transfer_and_freeze(source, har, seed=2)

    conv = [i for i in har.conv_indices if har.layers[i].has_params]
    assert len(conv) == 6
    for index in conv:
        assert params.layers[index].weights.tobytes() == source.layers[index].weights.tobytes()
        assert params.layers[index].bias.tobytes() == source.layers[index].bias.tobytes()
        assert params.layers[index].frozen
    assert params.checksum(conv) == source.checksum(conv)
    assert not any(params.layers[i].frozen for i in har.param_indices if i not in conv)


def test_transfer_rejects_mismatched_window_length():
    source = init_params(build_pretext_spec(window_length=40, horizon=8), seed=0)
    har = build_har_spec(6, window_length=40)
    source.layers[0].weights = np.zeros((5, 3, 128), dtype=np.float32)

    with pytest.raises(ShapeError):
        transfer_and_freeze(source, har)


def test_unfreeze_clears_every_flag():
    har = build_har_spec(6, window_length=40)
    params = unfreeze(transfer_and_freeze(init_params(build_pretext_spec(40, 8)), har))

    assert not any(layer.frozen for layer in params.layers.values())


# ---------------------
#     Execution
# ---------------------
def test_zero_output_layer_gives_zero_prediction():
    spec = build_pretext_spec(window_length=40, horizon=8)
    params = init_params(spec, seed=0)
    last = spec.param_indices[-1]
    params.layers[last].weights[:] = 0
    params.layers[last].bias[:] = 0

    out = forward(spec, params, np.random.default_rng(0).uniform(size=(40, 3)))

    assert out.shape == (8,)
    assert np.all(out == 0)


def test_softmax_head_outputs_probabilities():
    spec = build_har_spec(6, window_length=40, output_activation=Activation.softmax)
    params = init_params(spec, seed=0)
    out = predict(spec, params, np.random.default_rng(1).uniform(size=(5, 40, 3)))

    np.testing.assert_allclose(out.sum(axis=1), np.ones(5), atol=1e-5)


def test_batch_forward_matches_single_forwards():
    spec = build_har_spec(6, window_length=40)
    params = init_params(spec, seed=3)
    x = np.random.default_rng(2).uniform(size=(4, 40, 3))

    batched = forward(spec, params, x)
    singles = np.stack([forward(spec, params, example) for example in x])

    np.testing.assert_allclose(batched, singles, rtol=1e-5, atol=1e-6)


def test_eval_mode_is_deterministic():
    spec = build_har_spec(6, window_length=40)
    params = init_params(spec, seed=4)
    x = np.random.default_rng(5).uniform(size=(3, 40, 3))

    assert forward(spec, params, x).tobytes() == forward(spec, params, x).tobytes()


def test_training_mode_applies_dropout():
    spec = build_har_spec(6, window_length=40)
    params = init_params(spec, seed=4)
    x = np.random.default_rng(5).uniform(size=(3, 40, 3))
    stop = spec.feature_stop + 1

    eval_out = forward(spec, params, x, stop=stop)
    train_out = forward(spec, params, x, training=True, rng=np.random.default_rng(0), stop=stop)

    assert np.any(train_out == 0) and not np.array_equal(eval_out, train_out)


def test_wrong_input_shape_names_both_shapes():
    spec = build_pretext_spec(window_length=40, horizon=8)

    with pytest.raises(ShapeError) as e:
        forward(spec, init_params(spec), np.zeros((2, 41, 3)))

    assert '(2, 41, 3)' in str(e.value)
    assert '(40, 3)' in str(e.value)


def test_init_params_is_seeded():
    spec = build_har_spec(6, window_length=40)

    assert init_params(spec, seed=7).checksum() == init_params(spec, seed=7).checksum()
    assert init_params(spec, seed=7).checksum() != init_params(spec, seed=8).checksum()
