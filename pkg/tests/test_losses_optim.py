import numpy as np
import pytest

from crossmotion.layers import LayerParams
from crossmotion.losses import loss, one_hot
from crossmotion.optim import adam_step


def test_mse_of_identical_tensors_is_zero():
    x = np.random.default_rng(0).standard_normal((4, 24))
    value, grad = loss(x, x, 'mse')

    assert value == 0
    assert np.all(grad == 0)


def test_cross_entropy_closed_forms():
    target = one_hot(np.array([2]), 6, dtype=np.float64)
    value, _ = loss(target.copy(), target, 'cross_entropy')
    assert value == pytest.approx(-np.log(1 - 1e-7), abs=1e-9)

    uniform = np.full((1, 6), 1 / 6)
    value, _ = loss(uniform, target, 'cross_entropy')
    assert value == pytest.approx(np.log(6), abs=1e-5)


def test_cross_entropy_rejects_non_one_hot_target():
    pred = np.full((1, 3), 1 / 3)
    with pytest.raises(ValueError):
        loss(pred, np.array([[0.5, 0.5, 0.0]]), 'cross_entropy')
    with pytest.raises(ValueError):
        loss(pred, np.array([[1.0, 1.0, 0.0]]), 'binary_cross_entropy')


def test_binary_cross_entropy_prefers_the_true_class_only():
    target = one_hot(np.array([0]), 3, dtype=np.float64)
    good, _ = loss(np.array([[0.9, 0.1, 0.1]]), target, 'binary_cross_entropy')
    all_ones, _ = loss(np.array([[0.9, 0.9, 0.9]]), target, 'binary_cross_entropy')

    assert good < all_ones


def test_unknown_loss_kind_is_rejected():
    with pytest.raises(ValueError):
        loss(np.zeros(2), np.zeros(2), 'hinge')


def test_one_hot_rejects_out_of_range_labels():
    with pytest.raises(ValueError):
        one_hot(np.array([0, 6]), 6)


# ---------------------
#       Adam
# ---------------------
def _params(frozen=False):
    return LayerParams(weights=np.ones((2, 2)), bias=np.zeros(2), frozen=frozen)


def test_adam_first_step_moves_by_learning_rate():
    params = adam_step(_params(), (np.ones((2, 2)), np.ones(2)), lr=0.01)

    np.testing.assert_allclose(params.weights, np.ones((2, 2)) - 0.01, rtol=1e-6)
    np.testing.assert_allclose(params.bias, np.full(2, -0.01), rtol=1e-6)
    assert params.step_count == 1


def test_adam_zero_gradient_with_zero_moments_is_a_fixed_point():
    start = _params()
    params = adam_step(start, (np.zeros((2, 2)), np.zeros(2)), lr=0.01)

    np.testing.assert_array_equal(params.weights, start.weights)
    np.testing.assert_array_equal(params.bias, start.bias)


def test_adam_leaves_frozen_layers_bit_identical():
    start = _params(frozen=True)
    params = start
    for _ in range(5):
        params = adam_step(params, (np.full((2, 2), 3.0), np.full(2, 3.0)), lr=0.1)

    assert params.weights.tobytes() == start.weights.tobytes()
    assert params.step_count == 0


def test_adam_does_not_mutate_its_input():
    start = _params()
    adam_step(start, (np.ones((2, 2)), np.ones(2)), lr=0.1)

    np.testing.assert_array_equal(start.weights, np.ones((2, 2)))


def test_adam_rejects_non_positive_learning_rate():
    with pytest.raises(ValueError):
        adam_step(_params(), (np.ones((2, 2)), np.ones(2)), lr=0.0)


def test_adam_is_deterministic():
    grads = (np.random.default_rng(0).standard_normal((2, 2)), np.ones(2))
    a, b = _params(), _params()
    for _ in range(10):
        a, b = adam_step(a, grads, lr=1e-3), adam_step(b, grads, lr=1e-3)

    assert a.weights.tobytes() == b.weights.tobytes()
