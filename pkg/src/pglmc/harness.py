"""Experiment protocols: folds, tuning, replications.

The evaluation protocol is nested cross-validation: stratified outer folds
estimate performance, and each outer training part is re-split into inner
folds to pick hyperparameters by validation CCR. Simulation experiments
replace outer folds with fresh draws from the population, so the measures
can include the angle to the known optimal direction.

Every split and draw is keyed off a base seed plus (role, replication,
fold), making whole experiments reproducible bit for bit.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .core import Dataset, labels_from_scores, decision_scores, require_both_classes
from .dataio import standardize_fit_apply
from .errors import (
    AllCandidatesFailed,
    LengthMismatch,
    PglmcError,
    TooFewSamples,
)
from .metrics import EvalReport, ccr, evaluate_predictions
from .simulate import SimSpec, generate, generate_test
from .streams import (
    ROLE_INNER_SPLIT,
    ROLE_OUTER_SPLIT,
    ROLE_REPLICATION,
    child_rng,
    child_seed,
)
from .train import TrainConfig, train_pglmc, train_svm


class Method(str, Enum):
    """Decision rules the harness can evaluate."""

    PGLMC = "pglmc"
    SVM = "svm"
    BAYES = "bayes"


#: Trainer dispatch; patchable in tests to audit which rows training sees.
TRAINERS: dict[Method, Callable[..., object]] = {
    Method.PGLMC: train_pglmc,
    Method.SVM: train_svm,
}

_METHOD_ORDINAL = {Method.PGLMC: 0, Method.SVM: 1, Method.BAYES: 2}

DEFAULT_C0_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)


def default_tuning_grid() -> tuple[TrainConfig, ...]:
    """One candidate per decade of the box bound c0."""
    return tuple(TrainConfig(c0=c0) for c0 in DEFAULT_C0_GRID)


@dataclass(frozen=True)
class CVPlan:
    """Protocol parameters shared by all experiment runners."""

    outer_folds: int = 5
    inner_folds: int = 5
    replications: int = 1
    base_seed: int = 0
    tuning_grid: tuple[TrainConfig, ...] = field(default_factory=default_tuning_grid)

    def __post_init__(self):
        if self.outer_folds < 2 or self.inner_folds < 2:
            raise ValueError("fold counts must be at least 2")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        grid = tuple(self.tuning_grid)
        if not grid:
            raise ValueError("the tuning grid cannot be empty")
        object.__setattr__(self, "tuning_grid", grid)


@dataclass(frozen=True)
class ExperimentResult:
    """All reports of one method under one protocol.

    ``indices`` carries the (replication, fold) pair of each report;
    simulation protocols use fold 0. ``chosen_configs`` holds ``None`` for
    methods that do not train. Failed replications contribute no reports but
    leave an entry in ``failures``.
    """

    method: Method
    per_replication: tuple[EvalReport, ...]
    indices: tuple[tuple[int, int], ...]
    chosen_configs: tuple[TrainConfig | None, ...]
    train_sizes: tuple[tuple[int, int], ...]
    identifier: str = ""
    failures: tuple[str, ...] = ()
    per_class: tuple["ExperimentResult", ...] = ()


def kfold_split(n: int, k: int, stratify_labels, seed: int):
    """Deterministic stratified k-fold partition of ``range(n)``.

    Returns ``k`` pairs ``(train_indices, test_indices)``. Each class is
    dealt round-robin over a shared fold counter, so per-class fold counts
    differ by at most one and ``k = n`` degenerates to leave-one-out.
    """
    labels = np.asarray(stratify_labels)
    if labels.shape != (n,):
        raise LengthMismatch(f"{labels.shape[0]} labels for n={n}")
    if k < 2:
        raise ValueError("k must be at least 2")
    if n < k:
        raise TooFewSamples(f"cannot make {k} folds from {n} samples")
    rng = child_rng(seed, ROLE_OUTER_SPLIT)
    fold_of = np.empty(n, dtype=np.intp)
    counter = 0
    for value in np.unique(labels):
        idx = np.flatnonzero(labels == value)
        rng.shuffle(idx)
        for i in idx:
            fold_of[i] = counter % k
            counter += 1
    splits = []
    for f in range(k):
        test = np.flatnonzero(fold_of == f)
        train = np.flatnonzero(fold_of != f)
        splits.append((train, test))
    return splits


def tune(
    data: Dataset,
    plan: CVPlan,
    method: Method,
    seed: int | None = None,
    standardize: bool = False,
) -> TrainConfig:
    """Pick the grid candidate with the best mean inner-validation CCR.

    Ties break toward smaller ``c0``, then smaller ``c_const``. Candidates
    that fail on any inner fold are dropped; if every candidate drops,
    :class:`AllCandidatesFailed` reports the last failure.
    """
    method = Method(method)
    if method is Method.BAYES:
        raise ValueError("the fixed optimal rule has nothing to tune")
    if len(plan.tuning_grid) == 1:
        return plan.tuning_grid[0]
    if seed is None:
        seed = child_seed(plan.base_seed, ROLE_INNER_SPLIT)
    folds = kfold_split(data.n, plan.inner_folds, data.labels, seed)
    parts = []
    for train_idx, val_idx in folds:
        fit_part = data.subset(train_idx)
        val_part = data.subset(val_idx)
        if standardize:
            fit_part, (val_part,), _ = standardize_fit_apply(fit_part, (val_part,))
        parts.append((fit_part, val_part))
    scored = []
    last_failure = None
    for candidate in plan.tuning_grid:
        fold_ccrs = []
        for fit_part, val_part in parts:
            try:
                model = TRAINERS[method](fit_part, candidate)
                preds = labels_from_scores(decision_scores(model, val_part))
                fold_ccrs.append(ccr(preds, val_part.labels))
            except PglmcError as exc:
                last_failure = f"c0={candidate.c0:g}, c={candidate.c_const:g}: {exc}"
                break
        else:
            scored.append((float(np.mean(fold_ccrs)), candidate))
    if not scored:
        raise AllCandidatesFailed(
            f"every tuning candidate failed (last: {last_failure})"
        )
    scored.sort(key=lambda item: (-item[0], item[1].c0, item[1].c_const))
    return scored[0][1]


def _map_ordered(fn, items, max_workers):
    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def run_cv_experiment(
    data: Dataset,
    plan: CVPlan,
    method: Method,
    standardize: bool = False,
    identifier: str = "",
    max_workers: int | None = None,
) -> ExperimentResult:
    """Replicated nested cross-validation of one method on a fixed dataset.

    Standardization, when enabled, is refit on every training portion (outer
    and inner) so no fold statistics leak into evaluation. A failure inside
    a fold aborts that whole replication and is recorded.
    """
    method = Method(method)
    if method is Method.BAYES:
        raise ValueError("cross-validation needs a trainable method")
    require_both_classes(data)

    def one_replication(r: int):
        reports, indices, chosen, sizes = [], [], [], []
        try:
            folds = kfold_split(
                data.n,
                plan.outer_folds,
                data.labels,
                child_seed(plan.base_seed, ROLE_OUTER_SPLIT, r),
            )
            for f, (train_idx, test_idx) in enumerate(folds):
                train_part = data.subset(train_idx)
                test_part = data.subset(test_idx)
                config = tune(
                    train_part,
                    plan,
                    method,
                    child_seed(plan.base_seed, ROLE_INNER_SPLIT, r, f),
                    standardize,
                )
                if standardize:
                    train_part, (test_part,), _ = standardize_fit_apply(
                        train_part, (test_part,)
                    )
                model = TRAINERS[method](train_part, config)
                preds = labels_from_scores(decision_scores(model, test_part))
                reports.append(evaluate_predictions(preds, test_part.labels))
                indices.append((r, f))
                chosen.append(config)
                sizes.append((train_part.n_plus, train_part.n_minus))
        except PglmcError as exc:
            return [], [], [], [], [f"replication {r}: {exc}"]
        return reports, indices, chosen, sizes, []

    outcome = _map_ordered(one_replication, range(plan.replications), max_workers)
    reports, indices, chosen, sizes, failures = [], [], [], [], []
    for rep_reports, rep_indices, rep_chosen, rep_sizes, rep_failures in outcome:
        reports.extend(rep_reports)
        indices.extend(rep_indices)
        chosen.extend(rep_chosen)
        sizes.extend(rep_sizes)
        failures.extend(rep_failures)
    return ExperimentResult(
        method=method,
        per_replication=tuple(reports),
        indices=tuple(indices),
        chosen_configs=tuple(chosen),
        train_sizes=tuple(sizes),
        identifier=identifier,
        failures=tuple(failures),
    )


def run_sim_experiment(
    spec: SimSpec,
    plan: CVPlan,
    methods: Sequence[Method],
    test_per_class: int = 2000,
    standardize: bool = False,
    max_workers: int | None = None,
) -> list[ExperimentResult]:
    """Replicated simulation study with fresh train and test draws.

    Each replication derives its own population seed, draws a training set
    and a balanced test set, tunes trainable methods by inner CV on the
    training draw, and scores everything on the test draw, including angle
    and intercept deviation against the known optimal rule.
    """
    methods = [Method(m) for m in methods]
    if test_per_class < 1:
        raise ValueError("test_per_class must be at least 1")

    def one_replication(r: int):
        rep_spec = replace(spec, seed=child_seed(spec.seed, ROLE_REPLICATION, r))
        train, bayes = generate(rep_spec)
        test = generate_test(rep_spec, test_per_class)
        out = {}
        for method in methods:
            try:
                if method is Method.BAYES:
                    scores = test.features @ bayes.w_bayes + bayes.b_bayes
                    preds = labels_from_scores(scores)
                    report = evaluate_predictions(
                        preds,
                        test.labels,
                        model_w=bayes.w_bayes,
                        model_b=bayes.b_bayes,
                        bayes=bayes,
                    )
                    config = None
                else:
                    config = tune(
                        train,
                        plan,
                        method,
                        child_seed(
                            plan.base_seed,
                            ROLE_INNER_SPLIT,
                            r,
                            _METHOD_ORDINAL[method],
                        ),
                        standardize,
                    )
                    fit_part = train
                    eval_part = test
                    if standardize:
                        fit_part, (eval_part,), _ = standardize_fit_apply(
                            train, (test,)
                        )
                    model = TRAINERS[method](fit_part, config)
                    preds = labels_from_scores(decision_scores(model, eval_part))
                    report = evaluate_predictions(
                        preds,
                        eval_part.labels,
                        model_w=model.w,
                        model_b=model.b,
                        bayes=bayes,
                    )
                out[method] = (report, config, (train.n_plus, train.n_minus), None)
            except PglmcError as exc:
                out[method] = (None, None, None, f"replication {r}: {exc}")
        return out

    outcome = _map_ordered(one_replication, range(plan.replications), max_workers)
    results = []
    for method in methods:
        reports, indices, chosen, sizes, failures = [], [], [], [], []
        for r, per_method in enumerate(outcome):
            report, config, size, failure = per_method[method]
            if failure is not None:
                failures.append(failure)
                continue
            reports.append(report)
            indices.append((r, 0))
            chosen.append(config)
            sizes.append(size)
        results.append(
            ExperimentResult(
                method=method,
                per_replication=tuple(reports),
                indices=tuple(indices),
                chosen_configs=tuple(chosen),
                train_sizes=tuple(sizes),
                identifier=f"{spec.setting.value}:d={spec.d}",
                failures=tuple(failures),
            )
        )
    return results


def one_vs_rest_runs(
    features,
    raw_labels,
    plan: CVPlan,
    method: Method,
    standardize: bool = True,
    identifier: str = "",
    max_workers: int | None = None,
) -> ExperimentResult:
    """Cross-validate a multiclass problem as one-vs-rest binary runs.

    One binary experiment per distinct class (that class positive, the rest
    negative); the returned reports average the measures over classes at
    each (replication, fold). Train sizes are averaged the same way, chosen
    configs are dropped from the averaged rows, and the full single-class
    results stay available under ``per_class``.
    """
    features = np.asarray(features, dtype=np.float64)
    raw = [str(v) for v in raw_labels]
    if features.shape[0] != len(raw):
        raise LengthMismatch(
            f"{features.shape[0]} feature rows but {len(raw)} labels"
        )
    classes = sorted(set(raw))
    if len(classes) < 2:
        raise TooFewSamples("one-vs-rest needs at least two classes")
    per_class = []
    for cls in classes:
        labels = np.where([v == cls for v in raw], 1, -1).astype(np.int64)
        data = Dataset(features, labels)
        per_class.append(
            run_cv_experiment(
                data,
                plan,
                method,
                standardize=standardize,
                identifier=f"{identifier}[class={cls}]",
                max_workers=max_workers,
            )
        )
    common = min(len(res.per_replication) for res in per_class)
    averaged = []
    indices = []
    sizes = []
    for i in range(common):
        group = [res.per_replication[i] for res in per_class]
        averaged.append(
            EvalReport(
                ccr=float(np.mean([g.ccr for g in group])),
                mwe=float(np.mean([g.mwe for g in group])),
                n_test=int(np.mean([g.n_test for g in group])),
                error_plus=_none_mean([g.error_plus for g in group]),
                error_minus=_none_mean([g.error_minus for g in group]),
            )
        )
        indices.append(per_class[0].indices[i])
        sizes.append(
            (
                int(np.mean([res.train_sizes[i][0] for res in per_class])),
                int(np.mean([res.train_sizes[i][1] for res in per_class])),
            )
        )
    return ExperimentResult(
        method=Method(method),
        per_replication=tuple(averaged),
        indices=tuple(indices),
        chosen_configs=(None,) * common,
        train_sizes=tuple(sizes),
        identifier=identifier or f"one-vs-rest over {len(classes)} classes",
        failures=tuple(f for res in per_class for f in res.failures),
        per_class=tuple(per_class),
    )


def _none_mean(values):
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None
