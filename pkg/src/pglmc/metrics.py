"""Evaluation measures for binary classifiers.

Two headline numbers: the correct classification rate (CCR) over all test
samples, and the mean within-group error (MWE), which averages the two
per-class error rates so each class counts equally regardless of size. On a
balanced test set MWE equals 1 - CCR.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyInput, LengthMismatch, MissingClass, ZeroVector


def _paired(predictions, truth) -> tuple[np.ndarray, np.ndarray]:
    predictions = np.asarray(predictions, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if predictions.shape != truth.shape:
        raise LengthMismatch(
            f"{predictions.shape[0]} predictions for {truth.shape[0]} truths"
        )
    if predictions.size == 0:
        raise EmptyInput("no predictions to score")
    return predictions, truth


def ccr(predictions, truth) -> float:
    """Fraction of predictions matching the truth."""
    predictions, truth = _paired(predictions, truth)
    return float(np.mean(predictions == truth))


def per_class_error_rates(predictions, truth) -> tuple[float, float]:
    """Error rate within the +1 class and within the -1 class."""
    predictions, truth = _paired(predictions, truth)
    plus = truth == 1
    if not plus.any() or plus.all():
        raise MissingClass("per-class error rates need both classes in the truth")
    e_plus = float(np.mean(predictions[plus] != 1))
    e_minus = float(np.mean(predictions[~plus] != -1))
    return e_plus, e_minus


def mwe(predictions, truth) -> float:
    """Mean of the two per-class error rates."""
    e_plus, e_minus = per_class_error_rates(predictions, truth)
    return 0.5 * (e_plus + e_minus)


def direction_angle(w, reference) -> float:
    """Angle in degrees between two direction vectors, scale-invariant."""
    w = np.asarray(w, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if w.shape != reference.shape:
        raise LengthMismatch("direction vectors differ in length")
    nw = float(np.linalg.norm(w))
    nr = float(np.linalg.norm(reference))
    if nw == 0.0 or nr == 0.0:
        raise ZeroVector("angle is undefined for a zero direction")
    cosine = float(w @ reference) / (nw * nr)
    return math.degrees(math.acos(min(1.0, max(-1.0, cosine))))


def intercept_deviation(b: float, b_reference: float) -> float:
    """Absolute gap between a fitted intercept and a reference intercept."""
    return abs(float(b) - float(b_reference))


@dataclass(frozen=True)
class EvalReport:
    """Measures of one evaluation pass.

    ``angle_deg`` and ``intercept_dev`` stay ``None`` when no reference rule
    exists (real datasets). ``error_plus``/``error_minus`` are per-class
    error rates, ``None`` for a class absent from the truth.
    """

    ccr: float
    mwe: float
    n_test: int
    error_plus: float | None
    error_minus: float | None
    angle_deg: float | None = None
    intercept_dev: float | None = None


def evaluate_predictions(
    predictions,
    truth,
    *,
    model_w=None,
    model_b: float | None = None,
    bayes=None,
) -> EvalReport:
    """Bundle all measures for one pass.

    When a class is missing from the truth (single-sample folds in
    leave-one-out mode), MWE degrades to the mean error over the classes
    present instead of raising.
    """
    predictions, truth = _paired(predictions, truth)
    plus = truth == 1
    e_plus = float(np.mean(predictions[plus] != 1)) if plus.any() else None
    e_minus = float(np.mean(predictions[~plus] != -1)) if (~plus).any() else None
    rates = [e for e in (e_plus, e_minus) if e is not None]
    angle = None
    dev = None
    if bayes is not None and model_w is not None:
        angle = direction_angle(model_w, bayes.w_bayes)
        dev = intercept_deviation(model_b, bayes.b_bayes)
    return EvalReport(
        ccr=float(np.mean(predictions == truth)),
        mwe=float(np.mean(rates)),
        n_test=int(truth.size),
        error_plus=e_plus,
        error_minus=e_minus,
        angle_deg=angle,
        intercept_dev=dev,
    )


@dataclass(frozen=True)
class MeasureSummary:
    """Five-number summary plus mean and spread of one measure."""

    mean: float
    sd: float
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float


def _summarize(values: np.ndarray) -> MeasureSummary:
    q1, med, q3 = np.quantile(values, [0.25, 0.5, 0.75])
    return MeasureSummary(
        mean=float(values.mean()),
        sd=float(values.std()),
        minimum=float(values.min()),
        q1=float(q1),
        median=float(med),
        q3=float(q3),
        maximum=float(values.max()),
    )


def aggregate(reports: Sequence[EvalReport]) -> dict[str, MeasureSummary]:
    """Summaries per measure across reports.

    ``angle_deg`` and ``intercept_dev`` are summarized over the reports that
    carry them and omitted when none do.
    """
    if not reports:
        raise EmptyInput("no reports to aggregate")
    out = {
        "ccr": _summarize(np.array([r.ccr for r in reports])),
        "mwe": _summarize(np.array([r.mwe for r in reports])),
    }
    for key in ("angle_deg", "intercept_dev"):
        values = [getattr(r, key) for r in reports if getattr(r, key) is not None]
        if values:
            out[key] = _summarize(np.array(values))
    return out
