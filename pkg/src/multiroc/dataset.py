"""Evaluation inputs: probability matrices with ground-truth labels, plus file I/O.

A dataset is an n x k matrix of class-membership probabilities (each row on
the simplex) together with a length-n vector of 0-based integer labels.
Rows whose sum drifts from 1 by less than ``SIMPLEX_TOL`` (floating-point
round-tripping through text formats) are silently renormalized; larger
deviations are errors.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .errors import EmptyClass, LabelOutOfRange, ParseError, SimplexViolation

SIMPLEX_TOL = 1e-6


@dataclass(frozen=True)
class ScoredDataset:
    """Validated classifier output: probabilities and true labels.

    Immutable after construction; the stored arrays are copies with the
    writeable flag cleared, so instances are safe to share across threads.
    """

    probs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        labels = np.array(self.labels)
        if probs.ndim != 2:
            raise ParseError(f"probs must be 2-D, got shape {probs.shape}")
        n, k = probs.shape
        if n < 1:
            raise ParseError("need at least one observation")
        if k < 2:
            raise ParseError(f"need at least two classes, got k={k}")
        if labels.shape != (n,):
            raise ParseError(
                f"labels must have length {n}, got shape {labels.shape}"
            )
        if not np.all(np.isfinite(probs)):
            raise ParseError("probs contain non-finite values")
        if probs.min() < 0.0 or probs.max() > 1.0 + SIMPLEX_TOL:
            raise SimplexViolation("probabilities outside [0, 1]")
        sums = probs.sum(axis=1)
        off = np.abs(sums - 1.0)
        if off.max() > SIMPLEX_TOL:
            row = int(off.argmax())
            raise SimplexViolation(
                f"row {row} sums to {sums[row]!r}, off by more than {SIMPLEX_TOL}"
            )
        probs = probs / sums[:, None]
        if not np.issubdtype(labels.dtype, np.integer):
            as_int = labels.astype(int)
            if labels.dtype.kind == "f" and not np.all(as_int == labels):
                raise LabelOutOfRange("labels must be integers")
            labels = as_int
        labels = labels.astype(np.int64)
        if labels.min() < 0 or labels.max() >= k:
            bad = int(labels[(labels < 0) | (labels >= k)][0])
            raise LabelOutOfRange(f"label {bad} invalid for k={k}")
        counts = np.bincount(labels, minlength=k)
        if counts.min() == 0:
            raise EmptyClass(
                f"class {int(counts.argmin())} has no observations"
            )
        probs.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    @property
    def k(self) -> int:
        return self.probs.shape[1]


def class_counts(dataset: ScoredDataset) -> np.ndarray:
    """Per-class observation counts; sums to n."""
    return np.bincount(dataset.labels, minlength=dataset.k)


def _parse_csv(text: str) -> ScoredDataset:
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if r]
    if len(rows) < 2:
        raise ParseError("CSV needs a header row and at least one data row")
    header = rows[0]
    width = len(header)
    if width < 3:
        raise ParseError("CSV needs at least two probability columns and a label")
    probs, labels = [], []
    for idx, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise ParseError(f"line {idx}: expected {width} fields, got {len(row)}")
        try:
            probs.append([float(x) for x in row[:-1]])
            labels.append(int(row[-1]))
        except ValueError as exc:
            raise ParseError(f"line {idx}: {exc}") from None
    return ScoredDataset(np.array(probs), np.array(labels))


def _parse_json(text: str) -> ScoredDataset:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc)) from None
    if not isinstance(obj, dict) or "probs" not in obj or "labels" not in obj:
        raise ParseError('JSON must be an object with "probs" and "labels"')
    try:
        probs = np.array(obj["probs"], dtype=float)
        labels = np.array(obj["labels"])
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc)) from None
    return ScoredDataset(probs, labels)


def load_dataset(source, format: str | None = None) -> ScoredDataset:
    """Read a dataset from a path, file object, or byte/str stream.

    CSV layout: one header row, then n rows of k probability columns
    followed by one integer label column. JSON layout:
    ``{"probs": [[...]], "labels": [...]}``. When ``format`` is omitted it
    is inferred from the file extension (default csv).
    """
    if hasattr(source, "read"):
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    else:
        path = str(source)
        if format is None:
            format = "json" if path.lower().endswith(".json") else "csv"
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    if format is None:
        format = "csv"
    if format == "csv":
        return _parse_csv(text)
    if format == "json":
        return _parse_json(text)
    raise ParseError(f"unknown format {format!r}")


def save_dataset(dataset: ScoredDataset, path, format: str = "csv") -> None:
    """Write a dataset; reals carry 17 significant digits so load round-trips."""
    if format == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"p{c}" for c in range(dataset.k)] + ["label"])
            for row, label in zip(dataset.probs, dataset.labels):
                writer.writerow([f"{x:.17g}" for x in row] + [int(label)])
    elif format == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "probs": dataset.probs.tolist(),
                    "labels": dataset.labels.tolist(),
                },
                fh,
            )
    else:
        raise ParseError(f"unknown format {format!r}")
