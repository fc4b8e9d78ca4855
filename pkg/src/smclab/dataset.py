"""Observation sequences and their CSV serialization.

A :class:`Dataset` is a plain container: the observed series ``y_1..y_T``
plus whatever ground truth the simulator that produced it can vouch for
(true parameters, true latent path, true allocations).  The CSV format is
``t,y`` with optional ``x_true`` / ``z_true`` columns, UTF-8, LF line
endings, and shortest round-trip decimal formatting, so files re-read
bit-for-bit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ValidationError

__all__ = ["Dataset", "write_dataset_csv", "read_dataset_csv"]


@dataclass
class Dataset:
    """Observed series with optional simulator ground truth.

    ``true_allocations`` uses 1-based component labels, matching the public
    component-index convention used throughout the package.  An empty
    dataset (T=0) is permitted so that prior-only computations (e.g. a
    Gibbs run with no data) are expressible; simulators and the experiment
    harness require T >= 1.
    """

    observations: np.ndarray
    true_params: Optional[object] = None
    true_path: Optional[np.ndarray] = None
    true_allocations: Optional[np.ndarray] = None

    def __post_init__(self):
        self.observations = np.asarray(self.observations, dtype=float)
        if self.observations.ndim != 1:
            raise ValidationError("observations must be a 1-d sequence")
        if self.observations.size and not np.all(np.isfinite(self.observations)):
            raise ValidationError("observations must be finite")
        if self.true_path is not None:
            self.true_path = np.asarray(self.true_path, dtype=float)
            if self.true_path.shape != self.observations.shape:
                raise ValidationError("true_path length must match observations")
        if self.true_allocations is not None:
            self.true_allocations = np.asarray(self.true_allocations, dtype=int)
            if self.true_allocations.shape != self.observations.shape:
                raise ValidationError("true_allocations length must match observations")

    @property
    def T(self) -> int:
        return int(self.observations.size)


def _fmt(x: float) -> str:
    # repr() of a Python float is the shortest string that round-trips.
    return repr(float(x))


def write_dataset_csv(dataset: Dataset, path) -> None:
    """Write ``t,y[,x_true][,z_true]`` rows; t is 1-based."""
    path = Path(path)
    header = ["t", "y"]
    if dataset.true_path is not None:
        header.append("x_true")
    if dataset.true_allocations is not None:
        header.append("z_true")
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, y in enumerate(dataset.observations):
            row = [str(i + 1), _fmt(y)]
            if dataset.true_path is not None:
                row.append(_fmt(dataset.true_path[i]))
            if dataset.true_allocations is not None:
                row.append(str(int(dataset.true_allocations[i])))
            writer.writerow(row)


def read_dataset_csv(path) -> Dataset:
    """Read a dataset written by :func:`write_dataset_csv`."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty dataset file") from None
        if header[:2] != ["t", "y"]:
            raise ValidationError(f"{path}: expected header starting 't,y', got {header!r}")
        cols = {name: i for i, name in enumerate(header)}
        ys, xs, zs = [], [], []
        for row in reader:
            if not row:
                continue
            ys.append(float(row[cols["y"]]))
            if "x_true" in cols:
                xs.append(float(row[cols["x_true"]]))
            if "z_true" in cols:
                zs.append(int(row[cols["z_true"]]))
    return Dataset(
        observations=np.asarray(ys),
        true_path=np.asarray(xs) if xs else None,
        true_allocations=np.asarray(zs) if zs else None,
    )
