"""Driving detection from accelerometer windows.

Per-axis mean and population variance over non-overlapping windows feed a
small CART-style decision tree (Gini impurity, midpoint thresholds). The tree
decides whether the phone is in a moving vehicle, which gates the much more
expensive route pipeline.
"""
from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .trace_io import ImuTrace

DRIVING = "driving"
NULL = "null"
CLASSES = (DRIVING, NULL)
DEFAULT_WINDOW = 2.0  # s
DEFAULT_DEPTH = 4
FEATURE_NAMES = ("mean_x", "mean_y", "mean_z", "var_x", "var_y", "var_z")


@dataclass
class WindowFeatures:
    mean: np.ndarray
    variance: np.ndarray
    label: str | None = None
    start: float = 0.0

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float).reshape(3)
        self.variance = np.asarray(self.variance, dtype=float).reshape(3)
        if np.any(self.variance < 0):
            raise ValueError("variances must be non-negative")
        if self.label is not None and self.label not in CLASSES:
            raise ValueError(f"label must be one of {CLASSES} or None")

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.mean, self.variance])


def window_features(trace: ImuTrace, window: float = DEFAULT_WINDOW, label: str | None = None) -> list[WindowFeatures]:
    """Non-overlapping windows of ``window`` seconds; a trailing partial window is dropped."""
    if not window > 0:
        raise ValueError("window must be positive")
    dt = 1.0 / trace.nominal_rate
    span = float(trace.t[-1] - trace.t[0]) + dt
    count = int(np.floor(span / window + 1e-9))
    if count < 1:
        raise ValueError(f"trace of {span:.2f} s is shorter than one {window} s window")
    idx = np.floor((trace.t - trace.t[0]) / window + 1e-9).astype(int)
    out = []
    for w in range(count):
        sel = idx == w
        if not np.any(sel):
            continue
        a = trace.accel[sel]
        out.append(WindowFeatures(a.mean(axis=0), a.var(axis=0), label, float(trace.t[0] + w * window)))
    return out


def feature_matrix(rows: Sequence[WindowFeatures]) -> tuple[np.ndarray, np.ndarray | None]:
    x = np.array([r.vector for r in rows]) if rows else np.zeros((0, 6))
    if rows and all(r.label is not None for r in rows):
        y = np.array([1 if r.label == DRIVING else 0 for r in rows])
    else:
        y = None
    return x, y


# -- tree ----------------------------------------------------------------------------


@dataclass
class Node:
    # leaves: feature is None; driving = fraction of driving training rows
    driving: float
    n: int
    feature: int | None = None
    threshold: float = 0.0
    left: "Node | None" = None
    right: "Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    @property
    def prediction(self) -> str:
        return DRIVING if self.driving >= 0.5 else NULL

    @property
    def purity(self) -> float:
        return max(self.driving, 1.0 - self.driving)

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"leaf": True, "class": self.prediction, "driving": self.driving, "purity": self.purity, "n": self.n}
        return {
            "leaf": False,
            "feature": self.feature,
            "feature_name": FEATURE_NAMES[self.feature],
            "threshold": self.threshold,
            "driving": self.driving,
            "n": self.n,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Node":
        if d["leaf"]:
            return cls(float(d["driving"]), int(d["n"]))
        return cls(
            float(d["driving"]),
            int(d["n"]),
            int(d["feature"]),
            float(d["threshold"]),
            cls.from_dict(d["left"]),
            cls.from_dict(d["right"]),
        )


@dataclass
class DecisionTree:
    root: Node
    max_depth: int
    seed: int = 0
    feature_names: tuple[str, ...] = field(default=FEATURE_NAMES)

    @property
    def depth(self) -> int:
        def walk(node):
            return 0 if node.is_leaf else 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)

    def leaf(self, x: np.ndarray) -> Node:
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node

    def scores(self, x: np.ndarray) -> np.ndarray:
        return np.array([self.leaf(row).driving for row in np.atleast_2d(x)])

    def predict(self, x: np.ndarray) -> np.ndarray:
        return (self.scores(x) >= 0.5).astype(int)

    def to_dict(self) -> dict:
        return {"format_version": 1, "max_depth": self.max_depth, "seed": self.seed, "features": list(self.feature_names), "root": self.root.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        if d.get("format_version") != 1:
            raise ValueError("unsupported decision tree format")
        return cls(Node.from_dict(d["root"]), int(d["max_depth"]), int(d.get("seed", 0)))

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "DecisionTree":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _gini(pos: np.ndarray, total: np.ndarray) -> np.ndarray:
    p = np.divide(pos, total, out=np.zeros_like(pos, dtype=float), where=total > 0)
    return 2.0 * p * (1.0 - p)


def _best_split(x: np.ndarray, y: np.ndarray, order: np.ndarray):
    """Lowest weighted Gini over all features and midpoints; ties go to the
    earlier feature in ``order`` and then the lower threshold."""
    n = y.size
    parent = _gini(np.array([y.sum()]), np.array([n]))[0]
    best = None
    for f in order:
        col = x[:, f]
        s = np.argsort(col, kind="stable")
        v = col[s]
        ys = y[s]
        cut = np.flatnonzero(v[1:] > v[:-1])  # split after position cut
        if cut.size == 0:
            continue
        left_n = cut + 1.0
        left_pos = np.cumsum(ys)[cut].astype(float)
        right_n = n - left_n
        right_pos = ys.sum() - left_pos
        score = (left_n * _gini(left_pos, left_n) + right_n * _gini(right_pos, right_n)) / n
        k = int(np.argmin(score))
        if score[k] < parent - 1e-12 and (best is None or score[k] < best[0] - 1e-12):
            best = (float(score[k]), int(f), float((v[cut[k]] + v[cut[k] + 1]) / 2))
    return best


def train_tree(rows: Sequence[WindowFeatures] | tuple[np.ndarray, np.ndarray], max_depth: int = DEFAULT_DEPTH, seed: int = 0, min_samples_split: int = 2) -> DecisionTree:
    """Greedy Gini tree on the six window features.

    The seed fixes the order in which features are tried, which only matters
    for breaking exact ties between equally good splits.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    if isinstance(rows, tuple):
        x, y = np.asarray(rows[0], dtype=float), np.asarray(rows[1], dtype=int)
    else:
        x, y = feature_matrix(rows)
        if y is None:
            raise ValueError("every training window needs a label")
    if y.size == 0 or y.min() == y.max():
        raise ValueError("training data must contain both classes")
    order = np.random.default_rng(seed).permutation(x.shape[1])

    def grow(idx: np.ndarray, depth: int) -> Node:
        yy = y[idx]
        node = Node(float(yy.mean()), int(idx.size))
        if depth >= max_depth or idx.size < min_samples_split or yy.min() == yy.max():
            return node
        split = _best_split(x[idx], yy, order)
        if split is None:
            return node
        _, f, thr = split
        go_left = x[idx, f] <= thr
        node.feature, node.threshold = f, thr
        node.left = grow(idx[go_left], depth + 1)
        node.right = grow(idx[~go_left], depth + 1)
        return node

    return DecisionTree(grow(np.arange(y.size), 0), max_depth, seed)


def classify(tree: DecisionTree, f: WindowFeatures) -> tuple[str, float]:
    """Leaf class and its driving purity (the ROC score)."""
    leaf = tree.leaf(f.vector)
    return leaf.prediction, leaf.driving


# -- evaluation ------------------------------------------------------------------


def stratified_split(y: np.ndarray, train_fraction: float = 0.6, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Index arrays with ``train_fraction`` of each class in the training part."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls in np.unique(y):
        idx = rng.permutation(np.flatnonzero(y == cls))
        k = int(round(train_fraction * idx.size))
        train.append(idx[:k])
        test.append(idx[k:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def confusion_matrix(y_true: np.ndarray, y_pred: np.ndarray) -> np.ndarray:
    """Percent of all windows; rows = actual (driving, null), columns = predicted."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    n = y_true.size
    m = np.zeros((2, 2))
    for r, actual in enumerate((1, 0)):
        for c, predicted in enumerate((1, 0)):
            m[r, c] = np.sum((y_true == actual) & (y_pred == predicted))
    return 100.0 * m / max(n, 1)


def format_confusion(m: np.ndarray) -> str:
    lines = ["actual \\ predicted   driving     null"]
    for name, row in zip(CLASSES, m):
        lines.append(f"{name:<20}{row[0]:8.1f}%{row[1]:8.1f}%")
    return "\n".join(lines)


def write_confusion_csv(path: str | os.PathLike, m: np.ndarray) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["actual", "predicted_driving_pct", "predicted_null_pct"])
        for name, row in zip(CLASSES, m):
            w.writerow([name, f"{row[0]:.3f}", f"{row[1]:.3f}"])


def roc_curve(y_true: np.ndarray, scores: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(fpr, tpr, thresholds)`` sweeping the score from above the maximum down.

    Tied scores move together, so the curve runs from (0, 0) to (1, 1) through
    one point per distinct score.
    """
    y_true = np.asarray(y_true).astype(int)
    scores = np.asarray(scores, dtype=float)
    pos = max(int(y_true.sum()), 1)
    neg = max(int((1 - y_true).sum()), 1)
    levels = np.unique(scores)[::-1]
    fpr, tpr, thr = [0.0], [0.0], [np.inf]
    for s in levels:
        hit = scores >= s
        tpr.append(float(np.sum(hit & (y_true == 1))) / pos)
        fpr.append(float(np.sum(hit & (y_true == 0))) / neg)
        thr.append(float(s))
    if fpr[-1] != 1.0 or tpr[-1] != 1.0:
        fpr.append(1.0)
        tpr.append(1.0)
        thr.append(-np.inf)
    return np.array(fpr), np.array(tpr), np.array(thr)


def auc(fpr: np.ndarray, tpr: np.ndarray) -> float:
    return float(np.trapezoid(tpr, fpr))


def write_roc_csv(path: str | os.PathLike, fpr: np.ndarray, tpr: np.ndarray, thresholds: np.ndarray) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["threshold", "fpr", "tpr"])
        for t, f, p in zip(thresholds, fpr, tpr):
            w.writerow([t, f"{f:.6f}", f"{p:.6f}"])


@dataclass
class Evaluation:
    tree: DecisionTree
    confusion: np.ndarray
    accuracy: float
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray

    @property
    def auc(self) -> float:
        return auc(self.fpr, self.tpr)


def train_and_evaluate(rows: Sequence[WindowFeatures], max_depth: int = DEFAULT_DEPTH, seed: int = 0, train_fraction: float = 0.6) -> Evaluation:
    """Stratified split, fit on the training part, score the held-out part."""
    x, y = feature_matrix(rows)
    if y is None:
        raise ValueError("every window needs a label")
    tr, te = stratified_split(y, train_fraction, seed)
    tree = train_tree((x[tr], y[tr]), max_depth, seed)
    scores = tree.scores(x[te])
    pred = (scores >= 0.5).astype(int)
    fpr, tpr, thr = roc_curve(y[te], scores)
    return Evaluation(tree, confusion_matrix(y[te], pred), float(np.mean(pred == y[te])), fpr, tpr, thr)


def activity_corpus(seed: int = 0, traces_per_class: int = 20, duration: float = 240.0, rate: float = 10.0):
    """Labelled driving and walking traces for training the detector."""
    from .synth import driving_trace, walking_trace

    rng = np.random.default_rng(seed)
    out = []
    for k in range(traces_per_class):
        out.append((driving_trace(rng, duration, rate, trace_id=f"drive_{k + 1:02d}"), DRIVING))
        out.append((walking_trace(rng, duration, rate, trace_id=f"walk_{k + 1:02d}"), NULL))
    return out
