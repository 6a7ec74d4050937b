import numpy as np
import pytest

from routewarp.detect import (
    DRIVING,
    NULL,
    DecisionTree,
    WindowFeatures,
    activity_corpus,
    auc,
    classify,
    confusion_matrix,
    feature_matrix,
    format_confusion,
    roc_curve,
    stratified_split,
    train_and_evaluate,
    train_tree,
    window_features,
)
from routewarp.trace_io import ImuTrace


def _trace(accel, rate=10.0):
    accel = np.asarray(accel, float)
    t = np.arange(len(accel)) / rate
    return ImuTrace(t, accel, np.zeros_like(accel), nominal_rate=rate)


def test_constant_accel_has_no_variance():
    (f,) = window_features(_trace(np.tile([0.1, 0.2, 9.81], (20, 1))))
    np.testing.assert_allclose(f.variance, 0.0, atol=1e-24)
    np.testing.assert_allclose(f.mean, [0.1, 0.2, 9.81])


def test_alternating_x_has_unit_variance():
    a = np.zeros((20, 3))
    a[:, 0] = np.tile([1.0, -1.0], 10)
    (f,) = window_features(_trace(a))
    assert f.mean[0] == 0 and f.variance[0] == 1


def test_window_count_and_errors():
    assert len(window_features(_trace(np.zeros((2400, 3))), 2.0)) == 120
    # a trailing partial window is dropped
    assert len(window_features(_trace(np.zeros((25, 3))), 2.0)) == 1
    with pytest.raises(ValueError, match="shorter"):
        window_features(_trace(np.zeros((15, 3))), 2.0)
    with pytest.raises(ValueError):
        window_features(_trace(np.zeros((30, 3))), 0.0)


def test_features_do_not_depend_on_rate():
    t10 = np.arange(40) / 10.0
    t50 = np.arange(200) / 50.0
    sig = lambda t: np.stack([np.sin(2 * np.pi * t), 0 * t, 9.81 + 0 * t], axis=1)  # noqa: E731
    f10 = window_features(_trace(sig(t10), 10.0))
    f50 = window_features(_trace(sig(t50), 50.0))
    np.testing.assert_allclose([f.variance for f in f10], [f.variance for f in f50], atol=1e-12)


def test_window_features_validation():
    with pytest.raises(ValueError):
        WindowFeatures([0, 0, 0], [-1, 0, 0])
    with pytest.raises(ValueError):
        WindowFeatures([0, 0, 0], [0, 0, 0], label="cycling")


def _row(var_x, label, mean_z=9.81):
    return WindowFeatures([0.0, 0.0, mean_z], [var_x, 0.1, 0.1], label)


def test_separable_data_needs_one_split():
    rows = [_row(v, NULL) for v in (2.0, 2.5, 3.0)] + [_row(v, DRIVING) for v in (0.1, 0.2, 0.3)]
    tree = train_tree(rows, max_depth=4)
    assert tree.depth == 1
    x, y = feature_matrix(rows)
    assert np.all(tree.predict(x) == y)
    assert tree.root.threshold == pytest.approx(1.15)
    assert classify(tree, _row(0.05, None)) == (DRIVING, 1.0)
    assert classify(tree, _row(4.0, None)) == (NULL, 0.0)


def test_random_labels_reach_about_majority(rng):
    x = rng.normal(size=(400, 6))
    y = (rng.random(400) < 0.7).astype(int)
    tree = train_tree((x, y), max_depth=1)
    acc = np.mean(tree.predict(x) == y)
    assert y.mean() <= acc < y.mean() + 0.08


def test_deeper_trees_never_fit_worse(rng):
    x = rng.normal(size=(300, 6))
    y = (x[:, 0] + 0.5 * rng.normal(size=300) > 0).astype(int)
    acc = [np.mean(train_tree((x, y), max_depth=d).predict(x) == y) for d in range(1, 8)]
    assert all(b >= a for a, b in zip(acc, acc[1:]))


def test_row_order_does_not_matter(rng):
    x = rng.normal(size=(200, 6))
    y = (x[:, 1] - x[:, 4] > 0.2).astype(int)
    perm = rng.permutation(200)
    a = train_tree((x, y), seed=3)
    b = train_tree((x[perm], y[perm]), seed=3)
    probe = rng.normal(size=(500, 6))
    np.testing.assert_array_equal(a.predict(probe), b.predict(probe))


def test_training_errors():
    with pytest.raises(ValueError, match="both classes"):
        train_tree([_row(1.0, DRIVING), _row(2.0, DRIVING)])
    with pytest.raises(ValueError, match="label"):
        train_tree([_row(1.0, None), _row(2.0, NULL)])
    with pytest.raises(ValueError):
        train_tree([_row(1.0, DRIVING), _row(2.0, NULL)], max_depth=0)


def test_tree_round_trip(tmp_path, rng):
    x = rng.normal(size=(100, 6))
    y = (x[:, 2] > 0).astype(int)
    tree = train_tree((x, y), max_depth=3)
    p = tmp_path / "tree.json"
    tree.save(p)
    back = DecisionTree.load(p)
    np.testing.assert_array_equal(back.scores(x), tree.scores(x))
    assert back.to_dict() == tree.to_dict()


def test_roc_shape(rng):
    y = rng.integers(0, 2, 200)
    s = np.clip(y * 0.4 + rng.random(200) * 0.6, 0, 1)
    fpr, tpr, thr = roc_curve(y, s)
    assert (fpr[0], tpr[0]) == (0.0, 0.0) and (fpr[-1], tpr[-1]) == (1.0, 1.0)
    assert np.all(np.diff(fpr) >= 0) and np.all(np.diff(tpr) >= 0)
    assert 0.5 < auc(fpr, tpr) <= 1.0
    perfect = roc_curve(np.array([1, 1, 0, 0]), np.array([0.9, 0.8, 0.2, 0.1]))
    assert auc(perfect[0], perfect[1]) == 1.0


def test_confusion_layout():
    m = confusion_matrix(np.array([1, 1, 0, 0]), np.array([1, 0, 0, 0]))
    np.testing.assert_allclose(m, [[25.0, 25.0], [0.0, 50.0]])
    text = format_confusion(m)
    assert text.splitlines()[1].startswith("driving") and "25.0%" in text


def test_stratified_split_keeps_class_ratio():
    y = np.array([1] * 50 + [0] * 30)
    tr, te = stratified_split(y, 0.6, seed=1)
    assert np.sum(y[tr] == 1) == 30 and np.sum(y[tr] == 0) == 18
    assert not set(tr) & set(te) and len(tr) + len(te) == 80
    with pytest.raises(ValueError):
        stratified_split(y, 1.0)


def test_held_out_accuracy_on_activity_corpus():
    rows = []
    for trace, label in activity_corpus(seed=0, traces_per_class=8, duration=120.0):
        rows += window_features(trace, 2.0, label)
    ev = train_and_evaluate(rows, seed=0)
    assert ev.accuracy >= 0.95
    assert ev.auc >= 0.98
    assert ev.confusion.sum() == pytest.approx(100.0)
