"""Loading, splitting and summarizing the concrete mixture dataset.

The CSV layout follows the UCI "Concrete Compressive Strength" table: seven
content shares in kg/m3, the age of curing in days, then the compressive
strength fc in MPa.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

FEATURES = (
    "cement",
    "blast_furnace_slag",
    "fly_ash",
    "water",
    "superplasticizer",
    "coarse_aggregate",
    "fine_aggregate",
    "age",
)
TARGET = "fc"
COLUMNS = FEATURES + (TARGET,)
CONTENTS = FEATURES[:7]

UNITS = {name: "kg/m3" for name in CONTENTS}
UNITS["age"] = "day"
UNITS[TARGET] = "MPa"


class DataError(ValueError):
    """Raised for unreadable or invalid dataset content."""


@dataclass(frozen=True)
class Mixture:
    cement: float
    blast_furnace_slag: float
    fly_ash: float
    water: float
    superplasticizer: float
    coarse_aggregate: float
    fine_aggregate: float
    age: float = 28.0

    def __post_init__(self):
        values = self.as_array()
        if not np.all(np.isfinite(values)):
            raise DataError("mixture values must be finite")
        for name in CONTENTS:
            if getattr(self, name) < 0:
                raise DataError(f"negative content share: {name}={getattr(self, name)}")
        if self.age < 1:
            raise DataError(f"age of curing must be >= 1 day, got {self.age}")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURES], dtype=float)

    @classmethod
    def from_array(cls, values) -> "Mixture":
        values = np.asarray(values, dtype=float)
        if values.shape != (len(FEATURES),):
            raise DataError(f"expected {len(FEATURES)} values, got shape {values.shape}")
        return cls(*(float(v) for v in values))


@dataclass(frozen=True)
class Sample:
    mixture: Mixture
    fc: float


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix ``X`` (n x 8, columns in ``FEATURES`` order) and targets ``y``."""

    X: np.ndarray
    y: np.ndarray
    source_id: str = ""

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        y = np.array(self.y, dtype=float)
        if X.ndim != 2 or X.shape[1] != len(FEATURES):
            raise DataError(f"feature matrix must be n x {len(FEATURES)}, got {X.shape}")
        if y.shape != (X.shape[0],):
            raise DataError("target length does not match feature rows")
        if X.shape[0] == 0:
            raise DataError("dataset is empty")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise DataError("dataset contains non-finite values")
        if np.any(X[:, :7] < 0):
            raise DataError("dataset contains negative content shares")
        if np.any(X[:, 7] < 1):
            raise DataError("dataset contains age of curing below 1 day")
        if np.any(y < 0):
            raise DataError("dataset contains negative compressive strength")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.X.shape[0]

    def __getitem__(self, i) -> Sample:
        return Sample(Mixture.from_array(self.X[i]), float(self.y[i]))

    @property
    def samples(self) -> list[Sample]:
        return [self[i] for i in range(len(self))]

    def subset(self, indices, source_id=None) -> "Dataset":
        indices = np.asarray(indices, dtype=int)
        return Dataset(self.X[indices], self.y[indices], source_id or self.source_id)

    def table(self) -> np.ndarray:
        """All nine columns side by side (features then fc)."""
        return np.column_stack([self.X, self.y])

    @classmethod
    def from_samples(cls, samples, source_id="") -> "Dataset":
        samples = list(samples)
        if not samples:
            raise DataError("dataset is empty")
        X = np.array([s.mixture.as_array() for s in samples])
        y = np.array([s.fc for s in samples])
        return cls(X, y, source_id)


def default_csv_path() -> Path:
    """Path of the bundled 1030-sample dataset."""
    return Path(str(resources.files("concrete_mm") / "data" / "concrete.csv"))


def file_checksum(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_csv(path) -> Dataset:
    """Read a 9-column concrete CSV; errors name the offending row and column."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        header = [h.strip().lower() for h in header]
        if tuple(header) != COLUMNS:
            raise DataError(
                f"{path}: header must be {','.join(COLUMNS)}; got {','.join(header)}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(COLUMNS):
                raise DataError(
                    f"{path}: row {lineno} has {len(row)} cells, expected {len(COLUMNS)}"
                )
            values = []
            for name, cell in zip(COLUMNS, row):
                try:
                    value = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: row {lineno}, column '{name}': cannot parse {cell!r} as a number"
                    ) from None
                if not math.isfinite(value):
                    raise DataError(f"{path}: row {lineno}, column '{name}': non-finite value")
                if value < 0:
                    raise DataError(f"{path}: row {lineno}, column '{name}': negative value {value}")
                values.append(value)
            if values[7] < 1:
                raise DataError(f"{path}: row {lineno}, column 'age': must be >= 1 day")
            rows.append(values)
    if not rows:
        raise DataError(f"{path}: no data rows")
    table = np.array(rows)
    return Dataset(table[:, :8], table[:, 8], source_id=path.name)


def load_default() -> Dataset:
    return load_csv(default_csv_path())


@dataclass(frozen=True, eq=False)
class SplitSets:
    train: Dataset
    test: Dataset
    seed: int
    train_index: np.ndarray = field(repr=False)
    test_index: np.ndarray = field(repr=False)


def split(ds: Dataset, train_fraction: float = 0.7, seed: int = 0) -> SplitSets:
    """Uniform random partition with ``round(train_fraction * N)`` training rows."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n = len(ds)
    if n < 2:
        raise DataError("need at least 2 samples to split")
    n_train = int(math.floor(train_fraction * n + 0.5))
    n_train = min(max(n_train, 1), n - 1)
    perm = np.random.default_rng(seed).permutation(n)
    train_index = np.sort(perm[:n_train])
    test_index = np.sort(perm[n_train:])
    return SplitSets(
        train=ds.subset(train_index, f"{ds.source_id}:train"),
        test=ds.subset(test_index, f"{ds.source_id}:test"),
        seed=seed,
        train_index=train_index,
        test_index=test_index,
    )


@dataclass(frozen=True, eq=False)
class StatsTable:
    names: tuple
    minimum: np.ndarray
    maximum: np.ndarray
    mean: np.ndarray
    sd: np.ndarray

    def row(self, name) -> dict:
        i = self.names.index(name)
        return {
            "min": float(self.minimum[i]),
            "max": float(self.maximum[i]),
            "mean": float(self.mean[i]),
            "sd": float(self.sd[i]),
        }


def summary_stats(ds: Dataset) -> StatsTable:
    """Per-column min, max, mean and population standard deviation."""
    table = ds.table()
    return StatsTable(
        names=COLUMNS,
        minimum=table.min(axis=0),
        maximum=table.max(axis=0),
        mean=table.mean(axis=0),
        sd=table.std(axis=0),
    )


def pearson_matrix(ds: Dataset) -> np.ndarray:
    """9 x 9 Pearson correlation matrix over features and fc."""
    table = ds.table()
    centered = table - table.mean(axis=0)
    norms = np.sqrt((centered**2).sum(axis=0))
    for name, norm in zip(COLUMNS, norms):
        if norm == 0:
            raise DataError(f"Pearson coefficient undefined: column '{name}' is constant")
    corr = (centered.T @ centered) / np.outer(norms, norms)
    corr = np.clip((corr + corr.T) / 2, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return corr


def fc_histogram(ds: Dataset, bins: int = 20):
    """Counts and bin edges of the compressive strength distribution."""
    return np.histogram(ds.y, bins=bins)


@dataclass(frozen=True, eq=False)
class Scaler:
    """z-score transform with statistics taken from the training set."""

    mean: np.ndarray
    sd: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        sd = np.asarray(self.sd, dtype=float)
        if mean.shape != sd.shape:
            raise ValueError("mean and sd must have the same shape")
        if np.any(sd <= 0):
            raise DataError("scaler SD entries must be positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "sd", sd)

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.sd

    def inverse_transform(self, Z) -> np.ndarray:
        return np.asarray(Z, dtype=float) * self.sd + self.mean

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "sd": self.sd.tolist()}

    @classmethod
    def from_dict(cls, d) -> "Scaler":
        return cls(np.array(d["mean"], dtype=float), np.array(d["sd"], dtype=float))


def fit_scaler(train: Dataset) -> Scaler:
    mean = train.X.mean(axis=0)
    sd = train.X.std(axis=0)
    constant = [name for name, s in zip(FEATURES, sd) if s == 0]
    if constant:
        raise DataError(f"cannot standardize constant feature column(s): {', '.join(constant)}")
    return Scaler(mean, sd)


def apply_scaler(scaler: Scaler, mixture: Mixture) -> np.ndarray:
    return scaler.transform(mixture.as_array())
