"""Training entry points for the two linear classifiers.

``train_pglmc`` fits the population-guided large margin classifier: the
usual soft-margin program plus a nonnegative multiplier that pushes the
projected class means at least ``c_const`` apart. ``train_svm`` fits the
plain soft-margin SVM, which is the same program with the population
multiplier removed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .core import Dataset, LinearModel, class_means, decision_scores, require_both_classes
from .errors import DegenerateDirection
from .qp import SUPPORT_THRESHOLD_REL, assemble_dual, solve_dual, solve_svm_dual

#: Flag recorded on a model whose intercept came from the class-mean
#: midpoint because no multiplier ended strictly inside the box.
EMPTY_SUPPORT_FLAG = "empty_support_set"

#: Training scores within this distance of 1.0 count as piled on the margin.
PILING_TOLERANCE = 1e-3

MODEL_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters shared by both trainers.

    ``c_const`` (the required projected gap between class means) only
    affects the population-guided classifier. ``max_iter`` of ``None``
    defers to the solver default of 100000 iterations per sample.
    """

    c0: float = 1.0
    c_const: float = 2.0
    tol: float = 1e-6
    max_iter: int | None = None
    support_threshold_rel: float = SUPPORT_THRESHOLD_REL

    def __post_init__(self):
        if self.c0 <= 0.0:
            raise ValueError("c0 must be positive")
        if self.c_const <= 0.0:
            raise ValueError("c_const must be positive")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0.0 < self.support_threshold_rel < 0.5:
            raise ValueError("support_threshold_rel must be in (0, 0.5)")


def train_pglmc(
    data: Dataset, config: TrainConfig = TrainConfig(), *, freeze_population: bool = False
) -> LinearModel:
    """Fit the population-guided classifier.

    ``freeze_population`` pins the population multiplier at zero, leaving
    the SVM special case; it exists so the reduction can be exercised
    directly against :func:`train_svm`.
    """
    require_both_classes(data)
    m_plus, m_minus = class_means(data)
    problem = assemble_dual(data, m_plus, m_minus, config.c0, config.c_const)
    solution = solve_dual(
        problem,
        tol=config.tol,
        max_iter=config.max_iter,
        freeze_population=freeze_population,
    )
    lam = float(solution.beta[0])
    alpha = solution.beta[1:]
    delta = m_plus - m_minus
    w = lam * delta + data.features.T @ (data.labels * alpha)
    return _finalize(data, w, alpha, lam, m_plus, m_minus, config)


def train_svm(data: Dataset, config: TrainConfig = TrainConfig()) -> LinearModel:
    """Fit the plain soft-margin SVM on the same dual machinery."""
    require_both_classes(data)
    solution = solve_svm_dual(
        data, config.c0, tol=config.tol, max_iter=config.max_iter
    )
    alpha = solution.beta
    w = data.features.T @ (data.labels * alpha)
    m_plus, m_minus = class_means(data)
    return _finalize(data, w, alpha, 0.0, m_plus, m_minus, config)


def _finalize(data, w, alpha, lam, m_plus, m_minus, config) -> LinearModel:
    if not np.any(w):
        raise DegenerateDirection(
            "training produced a zero weight vector; the samples admit no "
            "separating direction under this configuration"
        )
    thr = config.support_threshold_rel * config.c0
    free = (alpha > thr) & (alpha < config.c0 - thr)
    support = np.flatnonzero(free)
    flags: tuple[str, ...] = ()
    if support.size:
        raw = data.features[support] @ w
        b = float(np.mean(data.labels[support] - raw))
    else:
        # No margin sample to pin the intercept; fall back to the midpoint
        # between the projected class means.
        b = float(-0.5 * (w @ (m_plus + m_minus)))
        flags = (EMPTY_SUPPORT_FLAG,)
    return LinearModel(
        w=w,
        b=b,
        alpha=alpha,
        lam=lam,
        support_indices=support,
        c0=config.c0,
        c_const=config.c_const,
        flags=flags,
    )


def margin_piling_fraction(
    model: LinearModel, data: Dataset, tolerance: float = PILING_TOLERANCE
) -> float:
    """Fraction of training samples whose score sits on the unit margin.

    Computes ``y_i f(x_i)`` for every sample and reports the share within
    ``tolerance`` of 1.0. High values indicate the projections piled up.
    """
    scores = decision_scores(model, data) * data.labels
    return float(np.mean(np.abs(scores - 1.0) <= tolerance))


def model_to_dict(model: LinearModel) -> dict:
    """Plain-python representation used for JSON serialization."""
    return {
        "schema_version": MODEL_SCHEMA_VERSION,
        "w": [float(v) for v in model.w],
        "b": model.b,
        "lambda": model.lam,
        "alpha": [float(v) for v in model.alpha],
        "support": [int(i) for i in model.support_indices],
        "config": {"c0": model.c0, "c_const": model.c_const},
        "flags": list(model.flags),
    }


def model_from_dict(payload: dict) -> LinearModel:
    version = payload.get("schema_version")
    if version != MODEL_SCHEMA_VERSION:
        raise ValueError(f"unsupported model schema version {version!r}")
    return LinearModel(
        w=np.asarray(payload["w"], dtype=np.float64),
        b=float(payload["b"]),
        alpha=np.asarray(payload["alpha"], dtype=np.float64),
        lam=float(payload["lambda"]),
        support_indices=np.asarray(payload["support"], dtype=np.intp),
        c0=float(payload["config"]["c0"]),
        c_const=float(payload["config"]["c_const"]),
        flags=tuple(payload.get("flags", ())),
    )


def save_model(model: LinearModel, path) -> None:
    """Write the model as JSON; floats keep full round-trip precision."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_model(path) -> LinearModel:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def config_with(config: TrainConfig, **changes) -> TrainConfig:
    """Copy ``config`` with the given fields replaced."""
    return replace(config, **changes)
