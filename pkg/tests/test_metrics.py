import numpy as np
import pytest
from sklearn.metrics import accuracy_score, f1_score, r2_score

from crossmotion.metrics import classification_metrics, metrics_from_confusion, r2


def test_perfect_predictions():
    labels = np.array([0, 1, 2, 3, 4, 5, 0, 1])
    report = classification_metrics(labels, labels, 6)

    assert report.accuracy == 1.0
    assert report.f1_macro == 1.0
    assert report.f1_weighted == 1.0
    assert np.array_equal(report.confusion, np.diag(np.bincount(labels, minlength=6)))


def test_small_confusion_matrix():
    report = metrics_from_confusion(np.array([[1, 1], [0, 2]]))

    assert report.accuracy == pytest.approx(0.75)
    assert report.per_class_f1 == pytest.approx([2 / 3, 0.8])
    assert report.f1_macro == pytest.approx(0.7333, abs=1e-4)
    assert report.f1_weighted == pytest.approx(0.7333, abs=1e-4)


def test_absent_class_scores_zero_f1():
    report = classification_metrics(np.array([0, 0, 1]), np.array([0, 0, 1]), 3)

    assert report.per_class_f1 == [1.0, 1.0, 0.0]
    assert report.f1_macro == pytest.approx(2 / 3)


def test_agrees_with_sklearn():
    rng = np.random.default_rng(0)
    labels = rng.integers(0, 6, size=300)
    predictions = np.where(rng.uniform(size=300) < 0.7, labels, rng.integers(0, 6, size=300))
    report = classification_metrics(predictions, labels, 6)

    assert report.accuracy == pytest.approx(accuracy_score(labels, predictions))
    assert report.f1_macro == pytest.approx(f1_score(labels, predictions, average='macro'))
    assert report.f1_weighted == pytest.approx(f1_score(labels, predictions, average='weighted'))


def test_classification_input_validation():
    with pytest.raises(ValueError):
        classification_metrics(np.array([]), np.array([]), 6)
    with pytest.raises(ValueError):
        classification_metrics(np.array([0, 6]), np.array([0, 1]), 6)
    with pytest.raises(ValueError):
        classification_metrics(np.array([0]), np.array([0, 1]), 6)


def test_r2_reference_points():
    target = np.array([[1.0, 2.0], [3.0, 4.0]])

    assert r2(target, target) == 1.0
    assert r2(np.full_like(target, target.mean()), target) == pytest.approx(0.0)
    assert r2(-target, target) < 0


def test_r2_of_constant_target_is_undefined():
    with pytest.raises(ValueError):
        r2(np.zeros(5), np.ones(5))


def _brute_force(predictions, labels, num_classes):
    f1 = []
    for c in range(num_classes):
        tp = sum(1 for p, t in zip(predictions, labels) if p == c and t == c)
        fp = sum(1 for p, t in zip(predictions, labels) if p == c and t != c)
        fn = sum(1 for p, t in zip(predictions, labels) if p != c and t == c)
        f1.append(0.0 if tp == 0 else 2 * tp / (2 * tp + fp + fn))
    support = [sum(1 for t in labels if t == c) for c in range(num_classes)]
    accuracy = sum(1 for p, t in zip(predictions, labels) if p == t) / len(labels)
    return accuracy, sum(f1) / num_classes, sum(f * s for f, s in zip(f1, support)) / len(labels)


def test_agrees_with_brute_force_counts():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        num_classes = int(rng.integers(2, 7))
        n = int(rng.integers(1, 30))
        labels = rng.integers(0, num_classes, size=n)
        predictions = rng.integers(0, num_classes, size=n)
        report = classification_metrics(predictions, labels, num_classes)
        accuracy, macro, weighted = _brute_force(predictions.tolist(), labels.tolist(), num_classes)

        assert abs(report.accuracy - accuracy) < 1e-9
        assert abs(report.f1_macro - macro) < 1e-9
        assert abs(report.f1_weighted - weighted) < 1e-9


def test_r2_matches_the_direct_formula():
    rng = np.random.default_rng(2)
    pred, target = rng.standard_normal((50, 24)), rng.standard_normal((50, 24))
    direct = 1 - np.sum((target - pred) ** 2) / np.sum((target - target.mean()) ** 2)

    assert abs(r2(pred, target) - direct) < 1e-12
    assert r2(pred, target) == pytest.approx(r2_score(target.reshape(-1), pred.reshape(-1)))
