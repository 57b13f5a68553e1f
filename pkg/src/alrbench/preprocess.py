"""Encoding, dimensionality reduction, normalization and train/test splitting.

Pipeline used by the harness::

    one_hot -> PCA back to the raw feature count (only with categoricals)
            -> split_train_test -> zscore_fit(train) -> zscore_apply(train, test)
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dataio import Dataset, RawDataset

__all__ = [
    "DimensionMismatch",
    "PoolTooSmall",
    "PcaTransform",
    "ZScoreStats",
    "Split",
    "one_hot",
    "one_hot_names",
    "pca_fit",
    "pca_apply",
    "zscore_fit",
    "zscore_apply",
    "split_train_test",
    "prepare_dataset",
    "train_fraction_size",
]

DEGENERATE_STD = 1e-12
RANK_TOL = 1e-10


class DimensionMismatch(ValueError):
    pass


class PoolTooSmall(ValueError):
    pass


def _categories(values) -> list:
    return sorted(set(values.tolist()), key=str)


def one_hot(raw: RawDataset) -> np.ndarray:
    """Numeric columns in order, then one binary block per categorical column.

    Tokens within a block are ordered by their string value.
    """
    blocks = [np.column_stack([c.values for c in raw.numeric_columns])] if raw.numeric_columns else []
    for col in raw.categorical_columns:
        cats = _categories(col.values)
        codes = np.array([cats.index(v) for v in col.values])
        blocks.append(np.eye(len(cats))[codes])
    if not blocks:
        return np.empty((raw.n_samples, 0))
    return np.hstack(blocks).astype(float)


def one_hot_names(raw: RawDataset) -> list[str]:
    names = [c.name for c in raw.numeric_columns]
    for col in raw.categorical_columns:
        names += [f"{col.name}={v}" for v in _categories(col.values)]
    return names


@dataclass(frozen=True)
class PcaTransform:
    mean: np.ndarray
    components: np.ndarray  # p x k, orthonormal columns
    explained_variance: np.ndarray
    rank_deficient: bool = False

    @property
    def k(self) -> int:
        return self.components.shape[1]

    @property
    def p(self) -> int:
        return self.components.shape[0]


def pca_fit(X, k: int) -> PcaTransform:
    """Top-``k`` principal directions of mean-centred ``X``.

    Components are ordered by decreasing variance and signed so that the
    largest-magnitude entry of each is positive (first index on ties).
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    if not 1 <= k <= p:
        raise ValueError(f"need 1 <= k <= p, got k={k}, p={p}")
    if p > n:
        raise ValueError(f"need p <= N, got p={p}, N={n}")
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = Xc.T @ Xc / n
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(-evals, kind="stable")
    evals = np.clip(evals[order], 0.0, None)
    evecs = evecs[:, order]
    comps = evecs[:, :k].copy()
    for j in range(k):
        # argmax returns the first index among equal magnitudes
        i = int(np.argmax(np.abs(comps[:, j])))
        if comps[i, j] < 0:
            comps[:, j] = -comps[:, j]
    scale = max(evals[0], 1.0) if evals.size else 1.0
    rank_def = bool(np.any(evals[:k] <= RANK_TOL * scale))
    return PcaTransform(mean=mean, components=comps, explained_variance=evals[:k], rank_deficient=rank_def)


def pca_apply(t: PcaTransform, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != t.p:
        raise DimensionMismatch(f"transform expects {t.p} columns, got {X.shape[1]}")
    return (X - t.mean) @ t.components


@dataclass(frozen=True)
class ZScoreStats:
    mean: np.ndarray
    std: np.ndarray
    degenerate: np.ndarray  # bool mask of columns whose std was replaced by 1


def zscore_fit(X_train) -> ZScoreStats:
    X = np.atleast_2d(np.asarray(X_train, dtype=float))
    if X.shape[0] == 0:
        raise ValueError("cannot fit normalization on an empty matrix")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    degenerate = std < DEGENERATE_STD
    std = np.where(degenerate, 1.0, std)
    return ZScoreStats(mean=mean, std=std, degenerate=degenerate)


def zscore_apply(stats: ZScoreStats, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != stats.mean.shape[0]:
        raise DimensionMismatch(f"stats cover {stats.mean.shape[0]} columns, got {X.shape[1]}")
    return (X - stats.mean) / stats.std


@dataclass(frozen=True)
class Split:
    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int


def train_fraction_size(n: int) -> int:
    """floor(0.8 * n) in exact integer arithmetic."""
    return n * 4 // 5


def split_train_test(n: int, seed: int) -> Split:
    if n < 5:
        raise PoolTooSmall(f"need at least 5 samples to split, got {n}")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = train_fraction_size(n)
    return Split(train_indices=perm[:n_train], test_indices=perm[n_train:], seed=seed)


def prepare_dataset(raw: RawDataset) -> Dataset:
    """One-hot encode and, when categoricals are present, project back to the raw width with PCA."""
    X = one_hot(raw)
    n_raw = len(raw.columns)
    meta = {
        "raw_features": n_raw,
        "numeric_features": len(raw.numeric_columns),
        "categorical_features": len(raw.categorical_columns),
        "total_features": X.shape[1],
        "pca": None,
    }
    if raw.categorical_columns and X.shape[1] > n_raw:
        t = pca_fit(X, n_raw)
        meta["pca"] = t
        X = pca_apply(t, X)
    ds = Dataset(name=raw.name, features=X, labels=raw.target, meta=meta)
    if not ds.supports_full_run:
        warnings.warn(
            f"{ds.name}: N={ds.n_samples} is too small for a full benchmark run "
            f"(an 80% pool must hold d + 21 = {ds.d + 21} samples)",
            stacklevel=2,
        )
    return ds
