"""Synthetic two-class Gaussian generators and concentration diagnostics.

Both settings draw the positive class from ``N(mu, Sigma)`` and the negative
class from ``N(-mu, Sigma)``, with ``mu`` scaled so the Mahalanobis distance
between the class centers hits a fixed target (2.7 by default, which puts
the best achievable correct-classification rate near 0.91).

``independent``: ``mu = c * (1, ..., 1)`` and ``Sigma = I``.

``block``: ``mu = c * (sqrt(p), sqrt(p-1), ..., sqrt(1), 0, ..., 0)`` with
block size ``p``, and ``Sigma`` block-diagonal where every ``p x p`` block
has unit diagonal and constant off-diagonal correlation ``rho``. The
interchangeable block structure has the closed-form inverse
``(1/(1-rho)) (I - rho/(1+(p-1) rho) J)`` used throughout instead of a dense
matrix inverse.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .core import Dataset
from .errors import DimensionMismatch, MissingClass
from .streams import ROLE_DIAGNOSTIC, ROLE_TEST_DRAW, ROLE_TRAIN_DRAW, child_rng

DEFAULT_MAHALANOBIS_TARGET = 2.7


class Setting(str, Enum):
    """Covariance layout of the synthetic draw."""

    INDEPENDENT = "independent"
    BLOCK = "block"


@dataclass(frozen=True)
class SimSpec:
    """Full description of one synthetic population."""

    setting: Setting
    d: int
    n_plus: int
    n_minus: int
    seed: int
    mahalanobis_target: float = DEFAULT_MAHALANOBIS_TARGET
    block_size: int = 50
    block_rho: float = 0.8

    def __post_init__(self):
        object.__setattr__(self, "setting", Setting(self.setting))
        if self.d < 1:
            raise ValueError("d must be at least 1")
        if self.n_plus < 0 or self.n_minus < 0:
            raise ValueError("class sizes cannot be negative")
        if self.mahalanobis_target <= 0.0:
            raise ValueError("mahalanobis_target must be positive")
        if self.setting is Setting.BLOCK:
            if self.block_size < 2:
                raise ValueError("block_size must be at least 2")
            if self.d % self.block_size != 0:
                raise ValueError(
                    f"d={self.d} is not a multiple of block_size={self.block_size}"
                )
            if not 0.0 < self.block_rho < 1.0:
                raise ValueError("block_rho must lie strictly between 0 and 1")


@dataclass(frozen=True)
class BayesReference:
    """Optimal linear rule for a :class:`SimSpec` population.

    ``w_bayes = Sigma^{-1} (2 mu)`` and ``b_bayes = 0`` by the symmetry of
    the two centers. ``mahalanobis`` is the realized center separation.
    """

    w_bayes: np.ndarray
    b_bayes: float
    mahalanobis: float

    def __post_init__(self):
        w = np.asarray(self.w_bayes, dtype=np.float64)
        w.setflags(write=False)
        object.__setattr__(self, "w_bayes", w)


def interchangeable_inverse_apply(
    vec: np.ndarray, rho: float, block_size: int
) -> np.ndarray:
    """Apply the inverse of the block-interchangeable covariance to ``vec``."""
    vec = np.asarray(vec, dtype=np.float64)
    if vec.shape[0] % block_size != 0:
        raise DimensionMismatch(
            f"vector length {vec.shape[0]} is not a multiple of {block_size}"
        )
    blocks = vec.reshape(-1, block_size)
    shrink = rho / (1.0 + (block_size - 1) * rho)
    out = (blocks - shrink * blocks.sum(axis=1, keepdims=True)) / (1.0 - rho)
    return out.reshape(-1)


def _direction(spec: SimSpec) -> np.ndarray:
    """Unscaled mean direction for the setting."""
    if spec.setting is Setting.INDEPENDENT:
        return np.ones(spec.d)
    v = np.zeros(spec.d)
    v[: spec.block_size] = np.sqrt(np.arange(spec.block_size, 0, -1, dtype=np.float64))
    return v


def scale_factor(spec: SimSpec) -> float:
    """Scalar ``c`` putting the centers ``2.7`` apart in Mahalanobis distance.

    Solves ``sqrt((2 c v)' Sigma^{-1} (2 c v)) = target`` for the setting's
    direction ``v``, so ``c = target / (2 sqrt(v' Sigma^{-1} v))``.
    """
    v = _direction(spec)
    if spec.setting is Setting.INDEPENDENT:
        quad = float(v @ v)
    else:
        quad = float(v @ interchangeable_inverse_apply(v, spec.block_rho, spec.block_size))
    return spec.mahalanobis_target / (2.0 * math.sqrt(quad))


def mean_vector(spec: SimSpec) -> np.ndarray:
    """Positive-class center ``mu`` (the negative class sits at ``-mu``)."""
    return scale_factor(spec) * _direction(spec)


def bayes_reference(spec: SimSpec) -> BayesReference:
    mu = mean_vector(spec)
    if spec.setting is Setting.INDEPENDENT:
        w = 2.0 * mu
    else:
        w = interchangeable_inverse_apply(2.0 * mu, spec.block_rho, spec.block_size)
    realized = math.sqrt(float((2.0 * mu) @ w))
    return BayesReference(w_bayes=w, b_bayes=0.0, mahalanobis=realized)


def _draw(spec: SimSpec, rng: np.random.Generator, n_plus: int, n_minus: int) -> Dataset:
    n = n_plus + n_minus
    mu = mean_vector(spec)
    if spec.setting is Setting.INDEPENDENT:
        x = rng.standard_normal((n, spec.d))
    else:
        # Shared block factor u gives every within-block pair correlation rho.
        z = rng.standard_normal((n, spec.d))
        u = rng.standard_normal((n, spec.d // spec.block_size))
        x = math.sqrt(1.0 - spec.block_rho) * z
        x += math.sqrt(spec.block_rho) * np.repeat(u, spec.block_size, axis=1)
    x[:n_plus] += mu
    x[n_plus:] -= mu
    labels = np.concatenate([np.ones(n_plus, np.int64), -np.ones(n_minus, np.int64)])
    return Dataset(x, labels)


def generate(spec: SimSpec) -> tuple[Dataset, BayesReference]:
    """Draw the training dataset for ``spec`` along with its optimal rule."""
    if spec.n_plus == 0 or spec.n_minus == 0:
        raise MissingClass("training draws need at least one sample per class")
    rng = child_rng(spec.seed, ROLE_TRAIN_DRAW)
    return _draw(spec, rng, spec.n_plus, spec.n_minus), bayes_reference(spec)


def generate_test(spec: SimSpec, n_per_class: int) -> Dataset:
    """Balanced evaluation draw on a stream independent of the training one."""
    if n_per_class < 0:
        raise ValueError("n_per_class cannot be negative")
    rng = child_rng(spec.seed, ROLE_TEST_DRAW)
    return _draw(spec, rng, n_per_class, n_per_class)


@dataclass(frozen=True)
class DistanceStats:
    """Normalized pairwise-distance statistics for one draw.

    Distances are divided by ``sqrt(d)``; ``cv`` is the coefficient of
    variation (NaN when the mean distance is zero, e.g. duplicated rows).
    """

    within_mean: float
    within_cv: float
    between_mean: float
    between_cv: float
    within_pairs: int
    between_pairs: int


def _spread(values: np.ndarray) -> tuple[float, float]:
    if values.size == 0:
        return math.nan, math.nan
    mean = float(values.mean())
    if mean == 0.0:
        return 0.0, math.nan
    return mean, float(values.std() / mean)


def distance_concentration(data: Dataset) -> DistanceStats:
    """Within- and between-class pairwise distance spread, scaled by sqrt(d)."""
    sq = np.sum(data.features**2, axis=1)
    gram = data.features @ data.features.T
    dist_sq = np.maximum(sq[:, None] + sq[None, :] - 2.0 * gram, 0.0)
    dist = np.sqrt(dist_sq) / math.sqrt(data.d)
    iu, ju = np.triu_indices(data.n, k=1)
    same = data.labels[iu] == data.labels[ju]
    within = dist[iu[same], ju[same]]
    between = dist[iu[~same], ju[~same]]
    w_mean, w_cv = _spread(within)
    b_mean, b_cv = _spread(between)
    return DistanceStats(
        within_mean=w_mean,
        within_cv=w_cv,
        between_mean=b_mean,
        between_cv=b_cv,
        within_pairs=int(within.size),
        between_pairs=int(between.size),
    )


@dataclass(frozen=True)
class DimDiagnostics:
    """Concentration measurements at one dimension, with reference values.

    Per-coordinate variances are 1 in both settings, so normalized
    within-class distances should approach ``sqrt(2)`` as ``d`` grows and
    between-class ones ``sqrt(2 + |2 mu|^2 / d)``.
    """

    d: int
    stats: DistanceStats
    expected_within: float
    expected_between: float


@dataclass(frozen=True)
class ConcentrationReport:
    spec: SimSpec
    per_dim: tuple[DimDiagnostics, ...]


def hdlss_diagnostics(spec: SimSpec, dims) -> ConcentrationReport:
    """Measure distance concentration across dimensions for ``spec``.

    Each dimension gets its own derived stream, so reports are reproducible
    and do not disturb the training or test draws.
    """
    entries = []
    for d in dims:
        sub = replace(spec, d=int(d))
        if sub.n_plus == 0 or sub.n_minus == 0:
            raise MissingClass("diagnostics need samples from both classes")
        rng = child_rng(spec.seed, ROLE_DIAGNOSTIC, int(d))
        data = _draw(sub, rng, sub.n_plus, sub.n_minus)
        mu = mean_vector(sub)
        gap_sq = float((2.0 * mu) @ (2.0 * mu))
        entries.append(
            DimDiagnostics(
                d=int(d),
                stats=distance_concentration(data),
                expected_within=math.sqrt(2.0),
                expected_between=math.sqrt(2.0 + gap_sq / sub.d),
            )
        )
    return ConcentrationReport(spec=spec, per_dim=tuple(entries))
