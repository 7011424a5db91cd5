"""Dataset and linear model containers shared by the classifiers.

A :class:`Dataset` holds a dense float feature matrix and signed unit labels
(+1 / -1). Arrays are copied on construction and frozen so downstream code
can rely on them never changing underneath a fitted model.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptyInput, LengthMismatch, MissingClass


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dataset:
    """Binary-labeled sample matrix.

    features: ``(n, d)`` float64 matrix, all entries finite.
    labels: ``(n,)`` ints, every entry +1 or -1. Empty classes are legal at
        construction time (test sets may be one-sided); training entry points
        enforce the presence of both classes separately.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64)
        if features.ndim != 2:
            raise DimensionMismatch(
                f"features must be 2-dimensional, got shape {features.shape}"
            )
        labels = np.array(self.labels, dtype=np.int64)
        if labels.ndim != 1:
            raise DimensionMismatch("labels must be a flat vector")
        if labels.shape[0] != features.shape[0]:
            raise LengthMismatch(
                f"{features.shape[0]} feature rows but {labels.shape[0]} labels"
            )
        if not np.all(np.isfinite(features)):
            raise ValueError("features contain NaN or infinite entries")
        if labels.size and not np.all(np.abs(labels) == 1):
            bad = labels[np.abs(labels) != 1][0]
            raise ValueError(f"labels must be +1 or -1, found {bad}")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        if self.feature_names is not None:
            names = tuple(str(n) for n in self.feature_names)
            if len(names) != features.shape[1]:
                raise LengthMismatch(
                    f"{features.shape[1]} feature columns but {len(names)} names"
                )
            object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def n_plus(self) -> int:
        return int(np.sum(self.labels == 1))

    @property
    def n_minus(self) -> int:
        return int(np.sum(self.labels == -1))

    def subset(self, indices) -> "Dataset":
        """New dataset holding the given rows (copies, order preserved)."""
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(self.features[idx], self.labels[idx], self.feature_names)


def require_both_classes(data: Dataset) -> None:
    """Raise :class:`MissingClass` unless both labels occur in ``data``."""
    if data.n_plus == 0 or data.n_minus == 0:
        missing = "+1" if data.n_plus == 0 else "-1"
        raise MissingClass(f"dataset has no {missing} samples")


def class_means(data: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Per-class feature means ``(mean_plus, mean_minus)``.

    Raises :class:`MissingClass` when either class is empty, since the mean
    of zero rows is undefined.
    """
    require_both_classes(data)
    plus = data.labels == 1
    return (
        data.features[plus].mean(axis=0),
        data.features[~plus].mean(axis=0),
    )


def imbalance_factor(data: Dataset) -> float:
    """Ratio of the larger class size to the smaller one (>= 1)."""
    require_both_classes(data)
    n_plus, n_minus = data.n_plus, data.n_minus
    return max(n_plus, n_minus) / min(n_plus, n_minus)


@dataclass(frozen=True)
class LinearModel:
    """Fitted linear decision rule ``f(x) = w . x + b``.

    ``alpha`` and ``lam`` are the dual certificate from training: per-sample
    box-constrained multipliers and the nonnegative weight on the
    between-class-mean direction (``lam`` is 0 for the plain SVM).
    ``support_indices`` are the margin samples used for the intercept.
    """

    w: np.ndarray
    b: float
    alpha: np.ndarray
    lam: float
    support_indices: np.ndarray
    c0: float
    c_const: float
    flags: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "w", _frozen_array(self.w, np.float64))
        object.__setattr__(self, "alpha", _frozen_array(self.alpha, np.float64))
        object.__setattr__(
            self, "support_indices", _frozen_array(self.support_indices, np.intp)
        )
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "flags", tuple(self.flags))

    @property
    def d(self) -> int:
        return self.w.shape[0]


@dataclass(frozen=True)
class ClassPrediction:
    """Predicted label with its raw decision score."""

    label: int
    score: float


def decision_scores(model: LinearModel, data: Dataset) -> np.ndarray:
    """Raw decision values ``X w + b`` for every row of ``data``."""
    if data.d != model.d:
        raise DimensionMismatch(
            f"model expects {model.d} features, data has {data.d}"
        )
    return data.features @ model.w + model.b


def labels_from_scores(scores: np.ndarray) -> np.ndarray:
    """Signed labels from decision scores; an exact zero maps to +1."""
    scores = np.asarray(scores)
    return np.where(scores >= 0.0, 1, -1).astype(np.int64)


def predict(model: LinearModel, x) -> ClassPrediction:
    """Classify a single feature vector."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != model.d:
        raise DimensionMismatch(
            f"model expects {model.d} features, vector has {x.shape[0]}"
        )
    score = float(x @ model.w + model.b)
    return ClassPrediction(label=1 if score >= 0.0 else -1, score=score)
