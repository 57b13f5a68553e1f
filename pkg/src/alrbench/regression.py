"""Closed-form ridge regression and bootstrap committees."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

__all__ = [
    "NonFiniteInput",
    "DimensionMismatch",
    "RidgeModel",
    "Committee",
    "fit_ridge",
    "predict",
    "ridge_objective",
    "bootstrap_committee",
    "committee_variance",
]

MAX_BOOTSTRAP_RETRIES = 10


class NonFiniteInput(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class RidgeModel:
    weights: np.ndarray
    bias: float
    reg: float

    @property
    def d(self) -> int:
        return self.weights.shape[0]

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.d:
            raise DimensionMismatch(f"model has {self.d} weights, X has {X.shape[1]} columns")
        return X @ self.weights + self.bias


def predict(model: RidgeModel, X) -> np.ndarray:
    return model.predict(X)


def fit_ridge(X, y, r: float) -> RidgeModel:
    r"""Minimise :math:`\|Xw + b - y\|^2 + r\|w\|^2` with an unpenalised bias.

    The bias is eliminated by centring, leaving the SPD system
    ``(Xc^T Xc + r I) w = Xc^T yc``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"X has {X.shape[0]} rows, y has {y.shape[0]}")
    if X.shape[0] < 1:
        raise ValueError("need at least one training sample")
    if not r > 0:
        raise ValueError(f"regularization must be positive, got {r}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise NonFiniteInput("X and y must be finite")
    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    Xc = X - x_mean
    A = Xc.T @ Xc
    A[np.diag_indices_from(A)] += r
    w = linalg.solve(A, Xc.T @ (y - y_mean), assume_a="pos", check_finite=False)
    return RidgeModel(weights=w, bias=float(y_mean - x_mean @ w), reg=float(r))


def ridge_objective(X, y, weights, bias, r) -> float:
    resid = np.asarray(X) @ weights + bias - np.asarray(y)
    return float(resid @ resid + r * (weights @ weights))


@dataclass(frozen=True)
class Committee:
    members: tuple[RidgeModel, ...]
    seed: int
    resamples: tuple[np.ndarray, ...] = ()

    @property
    def size(self) -> int:
        return len(self.members)

    def predictions(self, X) -> np.ndarray:
        """P x N matrix of member predictions."""
        # same arithmetic as RidgeModel.predict, so a member equal to the model agrees bit for bit
        return np.vstack([m.predict(X) for m in self.members])


def bootstrap_committee(X, y, P: int, r: float, seed) -> Committee:
    """``P`` ridge models, each fit on ``M`` indices drawn with replacement.

    A resample whose labels are all equal is redrawn, at most
    ``MAX_BOOTSTRAP_RETRIES`` times, after which the degenerate draw is kept.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    M = X.shape[0]
    if M < 2:
        raise ValueError("a committee needs at least 2 labeled samples")
    if P < 2:
        raise ValueError("a committee needs at least 2 members")
    rng = np.random.default_rng(seed)
    # redrawing cannot help when every label is the same
    retries = MAX_BOOTSTRAP_RETRIES if np.ptp(y) > 0 else 0
    members, draws = [], []
    for _ in range(P):
        for attempt in range(retries + 1):
            idx = rng.integers(0, M, size=M)
            if np.ptp(y[idx]) > 0 or attempt == retries:
                break
        # a resample is a multiset; sorting makes equal multisets give bit-identical fits
        idx = np.sort(idx)
        members.append(fit_ridge(X[idx], y[idx], r))
        draws.append(idx)
    return Committee(members=tuple(members), seed=seed, resamples=tuple(draws))


def committee_variance(c: Committee, X) -> np.ndarray:
    """Per-row population variance of the member predictions."""
    return c.predictions(X).var(axis=0)
