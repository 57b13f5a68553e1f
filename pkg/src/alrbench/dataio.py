"""CSV ingestion driven by small per-dataset manifest files.

A manifest is an INI file with a single ``[dataset]`` section::

    [dataset]
    name = autoMPG
    csv_path = auto_mpg.csv
    target_column = mpg
    categorical_columns = origin
    ignore_columns = name
    expected_samples = 392
    expected_raw_features = 7

Column kinds come only from the manifest. Every column that is neither the
target, ignored, nor categorical is numeric.
"""

from __future__ import annotations

import configparser
import csv
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "DataError",
    "FileMissing",
    "MalformedRow",
    "UnknownColumn",
    "EmptyDataset",
    "ManifestError",
    "DatasetManifest",
    "Column",
    "RawDataset",
    "Dataset",
    "load_manifest",
    "load_csv",
    "dataset_registry",
    "find_manifest",
    "default_data_dir",
    "slugify",
]

MISSING_TOKENS = frozenset({"", "na", "nan", "?", "null", "none"})


class DataError(Exception):
    """Base class for dataset loading problems."""


class FileMissing(DataError, FileNotFoundError):
    pass


class MalformedRow(DataError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line


class UnknownColumn(DataError):
    def __init__(self, name):
        super().__init__(f"unknown column {name!r}")
        self.name = name


class EmptyDataset(DataError):
    pass


class ManifestError(DataError):
    pass


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    csv_path: Path
    target_column: str | int
    categorical_columns: tuple = ()
    ignore_columns: tuple = ()
    expected_samples: int | None = None
    expected_raw_features: int | None = None
    expected_total_features: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "csv_path", Path(self.csv_path))
        object.__setattr__(self, "categorical_columns", tuple(self.categorical_columns))
        object.__setattr__(self, "ignore_columns", tuple(self.ignore_columns))
        if self.target_column in self.categorical_columns:
            raise ManifestError(f"{self.name}: target column is also listed as categorical")
        if self.target_column in self.ignore_columns:
            raise ManifestError(f"{self.name}: target column is also listed as ignored")

    @property
    def available(self) -> bool:
        return self.csv_path.is_file()

    @property
    def slug(self) -> str:
        return slugify(self.name)

    def with_data_dir(self, data_dir) -> "DatasetManifest":
        """Copy with ``csv_path`` resolved against ``data_dir`` (absolute paths kept)."""
        path = self.csv_path if self.csv_path.is_absolute() else Path(data_dir) / self.csv_path
        return DatasetManifest(
            self.name, path, self.target_column, self.categorical_columns, self.ignore_columns,
            self.expected_samples, self.expected_raw_features, self.expected_total_features,
        )


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # "numeric" | "categorical"
    values: np.ndarray  # float64 for numeric, object (str tokens) for categorical


@dataclass(frozen=True)
class RawDataset:
    name: str
    columns: tuple[Column, ...]
    target: np.ndarray
    raw_rows: int
    dropped_rows: int
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        n = len(self.target)
        if n < 1:
            raise EmptyDataset(f"{self.name}: no rows")
        for col in self.columns:
            if len(col.values) != n:
                raise ValueError(f"column {col.name!r} has {len(col.values)} values, expected {n}")

    @property
    def n_samples(self) -> int:
        return len(self.target)

    @property
    def numeric_columns(self) -> list[Column]:
        return [c for c in self.columns if c.kind == "numeric"]

    @property
    def categorical_columns(self) -> list[Column]:
        return [c for c in self.columns if c.kind == "categorical"]


@dataclass(frozen=True)
class Dataset:
    """Numeric dataset after encoding; arrays are read-only."""

    name: str
    features: np.ndarray
    labels: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        X = np.array(self.features, dtype=float)
        y = np.array(self.labels, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ValueError(f"features {X.shape} and labels {y.shape} disagree")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError(f"{self.name}: non-finite entries")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def supports_full_run(self) -> bool:
        """True when an 80% pool can hold d + 21 labeled samples."""
        return self.n_samples * 4 // 5 >= self.d + 21


def slugify(name: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in name.lower()).strip("_")


def _split_list(value: str) -> tuple:
    return tuple(_column_ref(v.strip()) for v in value.split(",") if v.strip())


def _column_ref(token: str) -> str | int:
    # bare integers address columns by position
    return int(token) if token.lstrip("-").isdigit() else token


def _optional_int(section, key):
    value = section.get(key, "").strip()
    return int(value) if value else None


def load_manifest(path) -> DatasetManifest:
    """Parse a manifest file; a relative ``csv_path`` is resolved against the manifest's folder."""
    path = Path(path)
    if not path.is_file():
        raise FileMissing(f"manifest not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    parser.read(path, encoding="utf-8")
    if "dataset" not in parser:
        raise ManifestError(f"{path}: missing [dataset] section")
    sec = parser["dataset"]
    known = {
        "name", "csv_path", "target_column", "categorical_columns", "ignore_columns",
        "expected_samples", "expected_raw_features", "expected_total_features",
    }
    unknown = set(sec) - known
    if unknown:
        raise ManifestError(f"{path}: unknown keys {sorted(unknown)}")
    for key in ("name", "csv_path", "target_column"):
        if not sec.get(key, "").strip():
            raise ManifestError(f"{path}: missing key {key!r}")
    csv_path = Path(sec["csv_path"].strip())
    if not csv_path.is_absolute():
        csv_path = path.parent / csv_path
    return DatasetManifest(
        name=sec["name"].strip(),
        csv_path=csv_path,
        target_column=_column_ref(sec["target_column"].strip()),
        categorical_columns=_split_list(sec.get("categorical_columns", "")),
        ignore_columns=_split_list(sec.get("ignore_columns", "")),
        expected_samples=_optional_int(sec, "expected_samples"),
        expected_raw_features=_optional_int(sec, "expected_raw_features"),
        expected_total_features=_optional_int(sec, "expected_total_features"),
    )


def _resolve(ref, header: Sequence[str]) -> int:
    if isinstance(ref, int):
        if not -len(header) <= ref < len(header):
            raise UnknownColumn(ref)
        return ref % len(header)
    try:
        return header.index(ref)
    except ValueError:
        raise UnknownColumn(ref) from None


def load_csv(manifest: DatasetManifest) -> RawDataset:
    """Read the manifest's CSV into a :class:`RawDataset`.

    Rows with a missing value in any used column are dropped and counted.
    A mismatch against ``expected_samples`` is reported in ``warnings``
    rather than raised.
    """
    path = Path(manifest.csv_path)
    if not path.is_file():
        raise FileMissing(f"{manifest.name}: CSV not found at {path}")

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyDataset(f"{manifest.name}: empty file") from None
        rows = []
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise MalformedRow(reader.line_num, f"expected {len(header)} fields, got {len(row)}")
            rows.append((reader.line_num, [cell.strip() for cell in row]))

    target_idx = _resolve(manifest.target_column, header)
    cat_idx = {_resolve(c, header) for c in manifest.categorical_columns}
    ignore_idx = {_resolve(c, header) for c in manifest.ignore_columns}
    if target_idx in cat_idx:
        raise ManifestError(f"{manifest.name}: target column is also categorical")
    feature_idx = [i for i in range(len(header)) if i != target_idx and i not in ignore_idx]
    if not feature_idx:
        raise EmptyDataset(f"{manifest.name}: no feature columns")

    used = [target_idx] + feature_idx
    kept, dropped = [], 0
    for line, cells in rows:
        if any(cells[i].lower() in MISSING_TOKENS for i in used):
            dropped += 1
            continue
        kept.append((line, cells))
    if not kept:
        raise EmptyDataset(f"{manifest.name}: no complete rows")

    def numeric(i):
        out = np.empty(len(kept))
        for r, (line, cells) in enumerate(kept):
            try:
                v = float(cells[i])
            except ValueError:
                raise MalformedRow(line, f"non-numeric value {cells[i]!r} in column {header[i]!r}") from None
            if not math.isfinite(v):
                raise MalformedRow(line, f"non-finite value in column {header[i]!r}")
            out[r] = v
        return out

    columns = []
    for i in feature_idx:
        if i in cat_idx:
            columns.append(Column(header[i], "categorical", np.array([c[i] for _, c in kept], dtype=object)))
        else:
            columns.append(Column(header[i], "numeric", numeric(i)))

    notes = []
    if manifest.expected_samples is not None and len(kept) != manifest.expected_samples:
        notes.append(
            f"{manifest.name}: expected {manifest.expected_samples} samples, "
            f"got {len(kept)} ({dropped} rows dropped)"
        )
    if manifest.expected_raw_features is not None and len(columns) != manifest.expected_raw_features:
        notes.append(
            f"{manifest.name}: expected {manifest.expected_raw_features} raw features, got {len(columns)}"
        )
    return RawDataset(
        name=manifest.name,
        columns=tuple(columns),
        target=numeric(target_idx),
        raw_rows=len(rows),
        dropped_rows=dropped,
        warnings=tuple(notes),
    )


def default_data_dir() -> Path:
    """``$ALRBENCH_DATA_DIR`` if set, else ``./data``."""
    return Path(os.environ.get("ALRBENCH_DATA_DIR", "data"))


def builtin_manifests() -> list[DatasetManifest]:
    files = sorted(
        (p for p in resources.files("alrbench").joinpath("manifests").iterdir() if p.name.endswith(".ini")),
        key=lambda p: p.name,
    )
    out = []
    for f in files:
        with resources.as_file(f) as path:
            m = load_manifest(path)
        # built-in paths are relative to the data directory, not the package
        out.append(
            DatasetManifest(
                m.name, Path(m.csv_path.name), m.target_column, m.categorical_columns,
                m.ignore_columns, m.expected_samples, m.expected_raw_features, m.expected_total_features,
            )
        )
    return out


def dataset_registry(data_dir=None) -> list[DatasetManifest]:
    """Built-in manifests with CSV paths resolved against ``data_dir``.

    Every known dataset is returned; check ``manifest.available`` to see
    whether its CSV is present.
    """
    data_dir = default_data_dir() if data_dir is None else Path(data_dir)
    return [m.with_data_dir(data_dir) for m in builtin_manifests()]


def find_manifest(name: str, data_dir=None) -> DatasetManifest:
    """Look a dataset up by name or slug (case-insensitive)."""
    key = slugify(name)
    for m in dataset_registry(data_dir):
        if m.slug == key:
            return m
    known = ", ".join(m.name for m in builtin_manifests())
    raise KeyError(f"unknown dataset {name!r}; known: {known}")
