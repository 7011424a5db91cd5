"""Command line interface.

Subcommands: ``simulate`` (draw a synthetic training set), ``train``,
``predict``, ``cv`` (replicated nested cross-validation on a CSV),
``sim-exp`` (replicated simulation study), ``diag`` (distance-concentration
report), and ``report`` (re-render figures from a results table).

Exit codes: 0 success, 1 usage or configuration problems, 2 data problems
(malformed files, missing classes, degenerate geometry), 3 solver failures.
Subcommands that draw random numbers or split data require ``--seed``;
reruns with equal arguments produce byte-identical outputs.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import LinearModel, labels_from_scores
from .dataio import (
    binarize,
    ensure_dir,
    format_float,
    load_csv,
    load_prediction_features,
    read_results_csv,
    results_to_rows,
    standardize_fit_apply,
    write_dataset_csv,
    write_results_csv,
)
from .errors import DATA_ERRORS, SOLVER_ERRORS, DimensionMismatch, PglmcError
from .harness import (
    CVPlan,
    Method,
    default_tuning_grid,
    one_vs_rest_runs,
    run_cv_experiment,
    run_sim_experiment,
)
from .metrics import aggregate
from .plots import render_measure_boxplots
from .simulate import SimSpec, generate, hdlss_diagnostics
from .train import TrainConfig, save_model, load_model, train_pglmc, train_svm

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_SOLVER = 3

PLAN_SCHEMA_VERSION = 1
_PLAN_KEYS = {"schema_version", "outer_folds", "inner_folds", "replications", "grid"}
_GRID_KEYS = {"c0", "c_const", "tol", "max_iter"}


def main() -> None:
    sys.exit(cli_main())


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.handler(args)
    except SOLVER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PglmcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _default_workers() -> int:
    raw = os.environ.get("PGLMC_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _add_population_args(sub):
    sub.add_argument(
        "--setting",
        choices=["independent", "block"],
        default="independent",
        help="covariance layout of the synthetic population",
    )
    sub.add_argument("--d", type=int, required=True, help="feature dimension")
    sub.add_argument("--n-plus", type=int, default=200)
    sub.add_argument("--n-minus", type=int, default=50)
    sub.add_argument(
        "--maha-target",
        type=float,
        default=2.7,
        help="Mahalanobis distance between the class centers",
    )
    sub.add_argument("--block-size", type=int, default=50)
    sub.add_argument("--block-rho", type=float, default=0.8)


def _spec_from_args(args) -> SimSpec:
    return SimSpec(
        setting=args.setting,
        d=args.d,
        n_plus=args.n_plus,
        n_minus=args.n_minus,
        seed=args.seed,
        mahalanobis_target=args.maha_target,
        block_size=args.block_size,
        block_rho=args.block_rho,
    )


def _load_plan_file(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict):
        raise ValueError("the plan file must hold a JSON object")
    unknown = sorted(set(payload) - _PLAN_KEYS)
    if unknown:
        raise ValueError(f"unknown plan fields: {', '.join(unknown)}")
    if payload.get("schema_version") != PLAN_SCHEMA_VERSION:
        raise ValueError(
            f"plan schema_version must be {PLAN_SCHEMA_VERSION}, "
            f"got {payload.get('schema_version')!r}"
        )
    if "grid" in payload:
        if not isinstance(payload["grid"], list) or not payload["grid"]:
            raise ValueError("plan grid must be a non-empty list")
        for entry in payload["grid"]:
            if not isinstance(entry, dict):
                raise ValueError("plan grid entries must be objects")
            bad = sorted(set(entry) - _GRID_KEYS)
            if bad:
                raise ValueError(f"unknown grid fields: {', '.join(bad)}")
    return payload


def _build_plan(args) -> CVPlan:
    file_cfg = _load_plan_file(args.plan) if getattr(args, "plan", None) else {}
    outer = args.outer_folds if args.outer_folds is not None else file_cfg.get("outer_folds", 5)
    inner = args.inner_folds if args.inner_folds is not None else file_cfg.get("inner_folds", 5)
    reps = args.reps if args.reps is not None else file_cfg.get("replications", 1)
    if "grid" in file_cfg:
        grid = tuple(TrainConfig(**entry) for entry in file_cfg["grid"])
    else:
        grid = default_tuning_grid()
    return CVPlan(
        outer_folds=outer,
        inner_folds=inner,
        replications=reps,
        base_seed=args.seed,
        tuning_grid=grid,
    )


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _summary_payload(results) -> dict:
    payload = {}
    for result in results:
        measures = {}
        if result.per_replication:
            for key, summary in aggregate(result.per_replication).items():
                measures[key] = {
                    k: _json_safe(v) for k, v in dataclasses.asdict(summary).items()
                }
        payload[result.method.value] = {
            "identifier": result.identifier,
            "n_reports": len(result.per_replication),
            "measures": measures,
            "failures": list(result.failures),
        }
    return payload


def _write_report_dir(results, out_dir, render_figures=True) -> list[Path]:
    out = ensure_dir(out_dir)
    rows = results_to_rows(results)
    results_path = out / "results.csv"
    write_results_csv(rows, results_path)
    summary_path = out / "summary.json"
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(_summary_payload(results), fh, indent=2)
        fh.write("\n")
    written = [results_path, summary_path]
    if render_figures and rows:
        written.extend(render_measure_boxplots(rows, out, stem="results"))
    return written


def cmd_simulate(args) -> int:
    spec = _spec_from_args(args)
    data, bayes = generate(spec)
    out = ensure_dir(args.out_dir)
    train_path = out / "train.csv"
    write_dataset_csv(data, train_path)
    bayes_path = out / "bayes.json"
    with open(bayes_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "setting": spec.setting.value,
                "d": spec.d,
                "n_plus": spec.n_plus,
                "n_minus": spec.n_minus,
                "seed": spec.seed,
                "mahalanobis_target": spec.mahalanobis_target,
                "mahalanobis": bayes.mahalanobis,
                "w_bayes": [float(v) for v in bayes.w_bayes],
                "b_bayes": bayes.b_bayes,
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    print(f"wrote {train_path} ({data.n} rows, {data.d} features) and {bayes_path}")
    return EXIT_OK


def _train_one(data, method: Method, config: TrainConfig, standardize: bool) -> LinearModel:
    trainer = train_pglmc if method is Method.PGLMC else train_svm
    if not standardize:
        return trainer(data, config)
    scaled, _, scaler = standardize_fit_apply(data)
    fitted = trainer(scaled, config)
    # Fold the z-scoring into (w, b) so the saved model scores raw features.
    w = fitted.w / scaler.scale
    b = fitted.b - float(np.sum(fitted.w * scaler.mean / scaler.scale))
    return LinearModel(
        w=w,
        b=b,
        alpha=fitted.alpha,
        lam=fitted.lam,
        support_indices=fitted.support_indices,
        c0=fitted.c0,
        c_const=fitted.c_const,
        flags=fitted.flags + ("standardized",),
    )


def cmd_train(args) -> int:
    method = Method(args.method)
    if method is Method.BAYES:
        raise ValueError("the optimal rule is not trainable; pick pglmc or svm")
    table = load_csv(args.data, label_column=args.label_column)
    data = binarize(table, args.positive_class)
    config = TrainConfig(
        c0=args.c0, c_const=args.c_const, tol=args.tol, max_iter=args.max_iter
    )
    model = _train_one(data, method, config, args.standardize)
    save_model(model, args.out)
    print(
        f"trained {method.value} on {data.n} samples ({data.d} features): "
        f"|support|={model.support_indices.size}, lambda={model.lam:g}, "
        f"b={model.b:g} -> {args.out}"
    )
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(args.model)
    features = load_prediction_features(args.data, label_column=args.label_column)
    if features.shape[1] != model.d:
        raise DimensionMismatch(
            f"model expects {model.d} features, data has {features.shape[1]}"
        )
    scores = features @ model.w + model.b
    labels = labels_from_scores(scores)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write("score,label\n")
        for s, l in zip(scores, labels):
            fh.write(f"{format_float(s)},{int(l)}\n")
    print(f"scored {features.shape[0]} rows -> {args.out}")
    return EXIT_OK


def cmd_cv(args) -> int:
    method = Method(args.method)
    plan = _build_plan(args)
    table = load_csv(args.data, label_column=args.label_column)
    workers = _default_workers()
    if args.one_vs_rest:
        result = one_vs_rest_runs(
            table.features,
            table.raw_labels,
            plan,
            method,
            standardize=args.standardize,
            identifier=f"cv:{Path(args.data).name}",
            max_workers=workers,
        )
    else:
        data = binarize(table, args.positive_class)
        result = run_cv_experiment(
            data,
            plan,
            method,
            standardize=args.standardize,
            identifier=f"cv:{Path(args.data).name}",
            max_workers=workers,
        )
    written = _write_report_dir([result], args.out_dir, not args.no_figures)
    for path in written:
        print(f"wrote {path}")
    if result.failures:
        print(f"{len(result.failures)} replication failure(s); see summary.json")
    return EXIT_OK


def cmd_sim_exp(args) -> int:
    methods = [Method(m.strip()) for m in args.methods.split(",") if m.strip()]
    if not methods:
        raise ValueError("--methods must name at least one method")
    spec = _spec_from_args(args)
    plan = _build_plan(args)
    results = run_sim_experiment(
        spec,
        plan,
        methods,
        test_per_class=args.test_per_class,
        max_workers=_default_workers(),
    )
    written = _write_report_dir(results, args.out_dir, not args.no_figures)
    for path in written:
        print(f"wrote {path}")
    failures = [f for r in results for f in r.failures]
    if failures:
        print(f"{len(failures)} replication failure(s); see summary.json")
    return EXIT_OK


def cmd_diag(args) -> int:
    dims = [int(v) for v in args.dims.split(",") if v.strip()]
    if not dims:
        raise ValueError("--dims must list at least one dimension")
    spec = SimSpec(
        setting=args.setting,
        d=dims[0],
        n_plus=args.n_plus,
        n_minus=args.n_minus,
        seed=args.seed,
        mahalanobis_target=args.maha_target,
        block_size=args.block_size,
        block_rho=args.block_rho,
    )
    report = hdlss_diagnostics(spec, dims)
    payload = {
        "setting": spec.setting.value,
        "seed": spec.seed,
        "n_plus": spec.n_plus,
        "n_minus": spec.n_minus,
        "per_dim": [
            {
                "d": entry.d,
                "within_mean": _json_safe(entry.stats.within_mean),
                "within_cv": _json_safe(entry.stats.within_cv),
                "between_mean": _json_safe(entry.stats.between_mean),
                "between_cv": _json_safe(entry.stats.between_cv),
                "within_pairs": entry.stats.within_pairs,
                "between_pairs": entry.stats.between_pairs,
                "expected_within": entry.expected_within,
                "expected_between": entry.expected_between,
            }
            for entry in report.per_dim
        ],
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_report(args) -> int:
    rows = read_results_csv(args.results)
    written = render_measure_boxplots(rows, args.out_dir, stem=args.stem)
    if not written:
        print("no measures with data; nothing rendered")
        return EXIT_DATA
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pglmc",
        description=(
            "Population-guided large margin classifier: training, prediction, "
            "synthetic populations, and replicated evaluation protocols."
        ),
    )
    parser.add_argument("--version", action="version", version=f"pglmc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw a synthetic training set")
    _add_population_args(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("train", help="fit a classifier on a CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--method", choices=["pglmc", "svm"], default="pglmc")
    p.add_argument("--label-column", default=None)
    p.add_argument("--positive-class", default=None)
    p.add_argument("--c0", type=float, default=1.0)
    p.add_argument("--c-const", type=float, default=2.0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument(
        "--standardize",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="z-score features before training (folded back into w, b)",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("predict", help="score a CSV with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--label-column", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("cv", help="replicated nested cross-validation on a CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--method", choices=["pglmc", "svm"], default="pglmc")
    p.add_argument("--label-column", default=None)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--positive-class", default=None)
    group.add_argument("--one-vs-rest", action="store_true")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--outer-folds", type=int, default=None)
    p.add_argument("--inner-folds", type=int, default=None)
    p.add_argument("--plan", default=None, help="JSON plan file (schema_version 1)")
    p.add_argument(
        "--standardize", action=argparse.BooleanOptionalAction, default=True
    )
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(handler=cmd_cv)

    p = sub.add_parser("sim-exp", help="replicated simulation study")
    _add_population_args(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--methods", default="pglmc,svm,bayes")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--outer-folds", type=int, default=None)
    p.add_argument("--inner-folds", type=int, default=None)
    p.add_argument("--plan", default=None, help="JSON plan file (schema_version 1)")
    p.add_argument("--test-per-class", type=int, default=2000)
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(handler=cmd_sim_exp)

    p = sub.add_parser("diag", help="distance-concentration report across dimensions")
    p.add_argument(
        "--setting", choices=["independent", "block"], default="independent"
    )
    p.add_argument("--dims", required=True, help="comma-separated dimensions")
    p.add_argument("--n-plus", type=int, default=20)
    p.add_argument("--n-minus", type=int, default=20)
    p.add_argument("--maha-target", type=float, default=2.7)
    p.add_argument("--block-size", type=int, default=50)
    p.add_argument("--block-rho", type=float, default=0.8)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_diag)

    p = sub.add_parser("report", help="render figures from a results table")
    p.add_argument("--results", required=True)
    p.add_argument("--stem", default="results")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(handler=cmd_report)

    return parser
