"""Dataset container, delimited-file ingestion, and interaction expansion."""

import csv
from dataclasses import dataclass

import numpy as np

CENTER_TOL = 1e-10


@dataclass
class Dataset:
    """Response vector plus n x p design with column labels.

    `centered` flags columns whose mean has been subtracted; `col_means`
    records the subtracted means so interaction expansion can recover the
    original values.
    """

    Y: np.ndarray
    X: np.ndarray
    labels: list
    centered: np.ndarray = None
    col_means: np.ndarray = None

    def __post_init__(self):
        self.Y = np.asarray(self.Y, dtype=float)
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        if self.Y.ndim != 1 or self.X.shape[0] != self.Y.shape[0]:
            raise ValueError("response and design row counts differ")
        if not (np.all(np.isfinite(self.Y)) and np.all(np.isfinite(self.X))):
            raise ValueError("dataset contains non-finite entries")
        if self.labels is None:
            self.labels = [f"x{j + 1}" for j in range(self.X.shape[1])]
        self.labels = list(self.labels)
        if len(self.labels) != self.X.shape[1]:
            raise ValueError("label count does not match design columns")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate column labels")
        if self.centered is None:
            self.centered = np.zeros(self.X.shape[1], dtype=bool)
        self.centered = np.asarray(self.centered, dtype=bool)
        if self.col_means is None:
            self.col_means = np.zeros(self.X.shape[1])
        self.col_means = np.asarray(self.col_means, dtype=float)
        means = np.abs(self.X[:, self.centered].mean(axis=0)) if self.X.size else []
        if np.any(np.asarray(means) > CENTER_TOL):
            raise ValueError("column flagged centered has nonzero mean")

    @property
    def n(self):
        return self.Y.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    def center(self):
        """Return a copy with every column mean-centered."""
        means = self.X.mean(axis=0)
        return Dataset(Y=self.Y.copy(), X=self.X - means,
                       labels=list(self.labels),
                       centered=np.ones(self.p, dtype=bool),
                       col_means=self.col_means + means)

    def uncentered_X(self):
        return self.X + self.col_means


def load_dataset(path, response_column, delimiter=",", center=True):
    """Read a delimited text file with a header row into a Dataset.

    All predictor columns must parse as numbers; a blank or non-numeric
    cell raises with the offending row and column named.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise ValueError(f"{path}: duplicate column names in header")
        if response_column not in header:
            raise ValueError(
                f"{path}: response column {response_column!r} not found")
        y_idx = header.index(response_column)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(
                    f"{path}: row {lineno} has {len(row)} fields, "
                    f"expected {len(header)}")
            vals = []
            for cell, name in zip(row, header):
                cell = cell.strip()
                if cell == "":
                    raise ValueError(
                        f"{path}: blank cell at row {lineno}, column {name!r}")
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}: non-numeric cell {cell!r} at row {lineno}, "
                        f"column {name!r}") from None
            rows.append(vals)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    arr = np.asarray(rows, dtype=float)
    Y = arr[:, y_idx]
    X = np.delete(arr, y_idx, axis=1)
    labels = [h for i, h in enumerate(header) if i != y_idx]
    ds = Dataset(Y=Y, X=X, labels=labels)
    return ds.center() if center else ds


def expand_interactions(dataset, modifier_column, target_columns, prefix):
    """Append modifier x target product columns to the design.

    Products are formed on the un-centered values (a centered-binary
    times centered-target product would change the model), then the
    whole design is re-centered if the input was centered.
    """
    if modifier_column not in dataset.labels:
        raise ValueError(f"modifier column {modifier_column!r} not found")
    for t in target_columns:
        if t not in dataset.labels:
            raise ValueError(f"target column {t!r} not found")
    raw = dataset.uncentered_X()
    mod = raw[:, dataset.labels.index(modifier_column)]
    if not np.all(np.isin(mod, (0.0, 1.0))):
        raise ValueError(
            f"modifier column {modifier_column!r} must be binary 0/1")
    new_cols = []
    new_labels = []
    for t in target_columns:
        new_cols.append(mod * raw[:, dataset.labels.index(t)])
        new_labels.append(prefix + t)
    for lbl in new_labels:
        if lbl in dataset.labels:
            raise ValueError(f"interaction label {lbl!r} collides with an "
                             "existing column")
    X_new = np.column_stack([raw] + new_cols)
    out = Dataset(Y=dataset.Y.copy(), X=X_new,
                  labels=dataset.labels + new_labels)
    return out.center() if np.all(dataset.centered) and dataset.p else out
