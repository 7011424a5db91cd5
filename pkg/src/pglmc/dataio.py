"""Delimited-file ingestion and table output.

CSV parsing goes through the stdlib ``csv`` module (RFC 4180 quoting).
Floats are written with ``repr``, which round-trips every double exactly,
so files regenerated from equal state are byte-identical.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import Dataset
from .errors import (
    DimensionMismatch,
    EmptyInput,
    MissingLabelColumn,
    NonNumericFeature,
    ParseError,
    UnknownPositiveClass,
)

RESULTS_COLUMNS = (
    "method",
    "replication",
    "fold",
    "ccr",
    "mwe",
    "angle_deg",
    "intercept_dev",
    "chosen_c0",
    "chosen_c",
    "n_train_plus",
    "n_train_minus",
)


def format_float(value: float) -> str:
    """Shortest decimal string that parses back to the same double."""
    return repr(float(value))


@dataclass(frozen=True)
class RawTable:
    """Parsed delimited file: numeric features plus one raw label column."""

    features: np.ndarray
    raw_labels: tuple[str, ...]
    feature_names: tuple[str, ...]
    label_column: str

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def classes(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.raw_labels)))


def _read_rows(path, delimiter):
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return list(csv.reader(fh, delimiter=delimiter))
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except csv.Error as exc:
        raise ParseError(f"malformed delimited file {path}: {exc}") from exc


def load_csv(
    path,
    delimiter: str = ",",
    has_header: bool = True,
    label_column: str | int | None = None,
) -> RawTable:
    """Parse a delimited file into features plus a raw label column.

    ``label_column`` may be a header name or a 0-based index; by default a
    column named ``label`` is used when a header exists, otherwise the last
    column. Cell coordinates in errors are 1-based and count the header.
    """
    rows = [r for r in _read_rows(path, delimiter) if r]
    if not rows:
        raise EmptyInput(f"{path} holds no rows")
    if has_header:
        names = [c.strip() for c in rows[0]]
        body = rows[1:]
        first_data_row = 2
    else:
        names = [f"f{i}" for i in range(len(rows[0]))]
        body = rows
        first_data_row = 1
    if not body:
        raise EmptyInput(f"{path} holds a header but no data rows")
    width = len(names)

    if isinstance(label_column, int):
        if not -width <= label_column < width:
            raise MissingLabelColumn(
                f"label column index {label_column} out of range for {width} columns"
            )
        label_idx = label_column % width
    else:
        wanted = label_column if label_column is not None else "label"
        if has_header and wanted in names:
            label_idx = names.index(wanted)
        elif label_column is None:
            label_idx = width - 1
        else:
            raise MissingLabelColumn(f"no column named {wanted!r} in {path}")

    feature_idx = [i for i in range(width) if i != label_idx]
    if not feature_idx:
        raise EmptyInput("the table has a label column but no feature columns")
    features = np.empty((len(body), len(feature_idx)))
    labels = []
    for r, row in enumerate(body):
        if len(row) != width:
            raise ParseError(
                f"row {first_data_row + r} has {len(row)} cells, expected {width}",
                row=first_data_row + r,
            )
        for c, col in enumerate(feature_idx):
            cell = row[col].strip()
            try:
                features[r, c] = float(cell)
            except ValueError:
                raise NonNumericFeature(
                    f"cell {cell!r} in column {names[col]!r} "
                    f"(row {first_data_row + r}) is not numeric",
                    row=first_data_row + r,
                    column=names[col],
                ) from None
        labels.append(row[label_idx].strip())
    if not np.all(np.isfinite(features)):
        raise ParseError("the table contains non-finite feature values")
    return RawTable(
        features=features,
        raw_labels=tuple(labels),
        feature_names=tuple(names[i] for i in feature_idx),
        label_column=names[label_idx],
    )


def _signed_unit(raw: str) -> int | None:
    try:
        value = float(raw)
    except ValueError:
        return None
    if value == 1.0:
        return 1
    if value == -1.0:
        return -1
    return None


def binarize(table: RawTable, positive_class: str | None = None) -> Dataset:
    """Map the raw label column onto +1/-1.

    Without ``positive_class`` the labels must already be signed units
    (+1/-1); otherwise rows matching ``positive_class`` become +1 and all
    others -1.
    """
    if positive_class is None:
        signed = [_signed_unit(v) for v in table.raw_labels]
        if any(s is None for s in signed):
            raise UnknownPositiveClass(
                "labels are not +1/-1; pass the positive class explicitly"
            )
        labels = np.array(signed, dtype=np.int64)
    else:
        wanted = str(positive_class).strip()
        if wanted not in {str(v).strip() for v in table.raw_labels}:
            raise UnknownPositiveClass(
                f"positive class {wanted!r} never occurs; "
                f"present classes: {', '.join(table.classes)}"
            )
        labels = np.where(
            [str(v).strip() == wanted for v in table.raw_labels], 1, -1
        ).astype(np.int64)
    return Dataset(table.features, labels, table.feature_names)


def binarize_one_vs_rest(table: RawTable) -> list[tuple[str, Dataset]]:
    """One dataset per distinct class (sorted), that class against the rest."""
    return [(cls, binarize(table, cls)) for cls in table.classes]


@dataclass(frozen=True)
class Standardizer:
    """Per-feature centering and scaling fitted on training rows.

    Constant features keep scale 1 so they are centered but not divided.
    """

    mean: np.ndarray
    scale: np.ndarray

    def apply(self, data: Dataset) -> Dataset:
        if data.d != self.mean.shape[0]:
            raise DimensionMismatch(
                f"standardizer fitted on {self.mean.shape[0]} features, "
                f"data has {data.d}"
            )
        return Dataset(
            (data.features - self.mean) / self.scale, data.labels, data.feature_names
        )


def standardize_fit_apply(
    train: Dataset, others: Sequence[Dataset] = ()
) -> tuple[Dataset, tuple[Dataset, ...], Standardizer]:
    """Fit z-scoring on ``train`` and apply it to ``train`` and ``others``."""
    if train.n == 0:
        raise EmptyInput("cannot standardize an empty training set")
    mean = train.features.mean(axis=0)
    sd = train.features.std(axis=0)
    scale = np.where(sd == 0.0, 1.0, sd)
    params = Standardizer(mean=mean, scale=scale)
    return params.apply(train), tuple(params.apply(o) for o in others), params


def write_dataset_csv(data: Dataset, path, label_column: str = "label") -> None:
    """Write features plus the signed label column, full float precision."""
    names = data.feature_names or tuple(f"f{i}" for i in range(data.d))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(names) + [label_column])
        for row, label in zip(data.features, data.labels):
            writer.writerow([format_float(v) for v in row] + [str(int(label))])


def read_dataset_csv(path, delimiter: str = ",", label_column: str | int | None = None) -> Dataset:
    """Read back a signed-label dataset written by :func:`write_dataset_csv`."""
    return binarize(load_csv(path, delimiter=delimiter, label_column=label_column))


def load_prediction_features(
    path,
    delimiter: str = ",",
    has_header: bool = True,
    label_column: str | int | None = None,
) -> np.ndarray:
    """Feature matrix for scoring; drops the label column when one exists.

    Unlabeled files are accepted: without an explicit ``label_column`` only
    a header column literally named ``label`` is dropped.
    """
    if label_column is None and has_header:
        rows = _read_rows(path, delimiter)
        if rows and "label" in [c.strip() for c in rows[0]]:
            label_column = "label"
    if label_column is None:
        # No label column: parse every column as a feature via a sentinel
        # table with an artificial trailing label.
        rows = [r for r in _read_rows(path, delimiter) if r]
        if not rows:
            raise EmptyInput(f"{path} holds no rows")
        names = (
            [c.strip() for c in rows[0]]
            if has_header
            else [f"f{i}" for i in range(len(rows[0]))]
        )
        body = rows[1:] if has_header else rows
        if not body:
            raise EmptyInput(f"{path} holds a header but no data rows")
        features = np.empty((len(body), len(names)))
        offset = 2 if has_header else 1
        for r, row in enumerate(body):
            if len(row) != len(names):
                raise ParseError(
                    f"row {offset + r} has {len(row)} cells, expected {len(names)}",
                    row=offset + r,
                )
            for c, cell in enumerate(row):
                try:
                    features[r, c] = float(cell.strip())
                except ValueError:
                    raise NonNumericFeature(
                        f"cell {cell.strip()!r} in column {names[c]!r} "
                        f"(row {offset + r}) is not numeric",
                        row=offset + r,
                        column=names[c],
                    ) from None
        return features
    table = load_csv(
        path, delimiter=delimiter, has_header=has_header, label_column=label_column
    )
    return table.features


def results_to_rows(results) -> list[dict]:
    """Flatten experiment results into result-table rows.

    ``results`` is an iterable of harness ``ExperimentResult`` objects; each
    report becomes one row keyed by :data:`RESULTS_COLUMNS`.
    """
    rows = []
    for result in results:
        for report, (rep, fold), cfg, sizes in zip(
            result.per_replication,
            result.indices,
            result.chosen_configs,
            result.train_sizes,
        ):
            rows.append(
                {
                    "method": str(getattr(result.method, "value", result.method)),
                    "replication": rep,
                    "fold": fold,
                    "ccr": report.ccr,
                    "mwe": report.mwe,
                    "angle_deg": report.angle_deg,
                    "intercept_dev": report.intercept_dev,
                    "chosen_c0": None if cfg is None else cfg.c0,
                    "chosen_c": None if cfg is None else cfg.c_const,
                    "n_train_plus": sizes[0],
                    "n_train_minus": sizes[1],
                }
            )
    return rows


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def write_results_csv(rows: Sequence[dict], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_COLUMNS)
        for row in rows:
            writer.writerow([_cell(row[col]) for col in RESULTS_COLUMNS])


def read_results_csv(path) -> list[dict]:
    """Parse a results table back into typed rows ('' becomes ``None``)."""
    raw = _read_rows(path, ",")
    if not raw:
        raise EmptyInput(f"{path} holds no rows")
    header = [c.strip() for c in raw[0]]
    missing = [c for c in RESULTS_COLUMNS if c not in header]
    if missing:
        raise ParseError(f"results table lacks columns: {', '.join(missing)}")
    rows = []
    for r, line in enumerate(raw[1:], start=2):
        if len(line) != len(header):
            raise ParseError(
                f"row {r} has {len(line)} cells, expected {len(header)}", row=r
            )
        entry = dict(zip(header, (c.strip() for c in line)))
        row = {"method": entry["method"]}
        for col in ("replication", "fold", "n_train_plus", "n_train_minus"):
            try:
                row[col] = int(entry[col]) if entry[col] else None
            except ValueError:
                raise ParseError(
                    f"cell {entry[col]!r} in column {col!r} is not an integer", row=r
                ) from None
        for col in ("ccr", "mwe", "angle_deg", "intercept_dev", "chosen_c0", "chosen_c"):
            try:
                row[col] = float(entry[col]) if entry[col] else None
            except ValueError:
                raise ParseError(
                    f"cell {entry[col]!r} in column {col!r} is not numeric", row=r
                ) from None
        rows.append(row)
    return rows


def ensure_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out
