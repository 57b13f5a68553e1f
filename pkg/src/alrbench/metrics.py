"""Error measures, curve areas, baseline normalisation and one-tailed Welch t-tests."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import special

__all__ = [
    "LengthMismatch",
    "EmptyInput",
    "TooFewPoints",
    "TooFewSamples",
    "MissingBaseline",
    "ZeroBaseline",
    "DegenerateCorrelation",
    "Curve",
    "AucSummary",
    "rmse",
    "pearson_cc",
    "auc",
    "normalize_and_improve",
    "improvement_percent",
    "t_cdf",
    "welch_t",
    "ttest_one_tailed",
]


class LengthMismatch(ValueError):
    pass


class EmptyInput(ValueError):
    pass


class TooFewPoints(ValueError):
    pass


class TooFewSamples(ValueError):
    pass


class MissingBaseline(KeyError):
    pass


class ZeroBaseline(ZeroDivisionError):
    pass


class DegenerateCorrelation(RuntimeWarning):
    """One side of a correlation had zero variance; 0 was returned."""


def _pair(pred, truth):
    pred = np.asarray(pred, dtype=float).ravel()
    truth = np.asarray(truth, dtype=float).ravel()
    if pred.shape != truth.shape:
        raise LengthMismatch(f"{pred.size} predictions vs {truth.size} targets")
    return pred, truth


def rmse(pred, truth) -> float:
    pred, truth = _pair(pred, truth)
    if pred.size == 0:
        raise EmptyInput("rmse of empty vectors")
    err = pred - truth
    return float(np.sqrt(np.mean(err * err)))


def pearson_cc(pred, truth) -> float:
    """Sample Pearson correlation; 0 with a :class:`DegenerateCorrelation` warning if either side is constant."""
    pred, truth = _pair(pred, truth)
    if pred.size < 2:
        raise TooFewSamples("correlation needs at least 2 points")
    a = pred - pred.mean()
    b = truth - truth.mean()
    denom = math.sqrt(float(a @ a) * float(b @ b))
    if denom == 0.0:
        warnings.warn("zero-variance input to pearson_cc", DegenerateCorrelation, stacklevel=2)
        return 0.0
    return float(np.clip((a @ b) / denom, -1.0, 1.0))


@dataclass(frozen=True)
class Curve:
    m_values: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m_values)
        v = np.asarray(self.values, dtype=float)
        if m.shape != v.shape:
            raise LengthMismatch("m_values and values differ in length")
        if m.size > 1 and np.any(np.diff(m) <= 0):
            raise ValueError("m_values must be strictly increasing")
        object.__setattr__(self, "m_values", m)
        object.__setattr__(self, "values", v)


def auc(curve: Curve) -> float:
    """Trapezoidal area under the curve."""
    m, v = np.asarray(curve.m_values, dtype=float), curve.values
    if m.size < 2:
        raise TooFewPoints("area needs at least two points")
    return float(np.sum(np.diff(m) * (v[1:] + v[:-1])) / 2.0)


@dataclass(frozen=True)
class AucSummary:
    dataset: str
    strategy: str
    auc_rmse_mean: float
    auc_rmse_var: float
    auc_cc_mean: float
    auc_cc_var: float
    normalized: dict | None = None  # same four keys, divided by the RS values

    FIELDS = ("auc_rmse_mean", "auc_rmse_var", "auc_cc_mean", "auc_cc_var")


def improvement_percent(field: str, normalized: float) -> float:
    """Percent improvement over the baseline for one normalised AUC.

    Larger mean CC is better; for mean RMSE and for both variance curves,
    smaller is better.
    """
    if field == "auc_cc_mean":
        return (normalized - 1.0) * 100.0
    return (1.0 - normalized) * 100.0


def normalize_and_improve(summaries, baseline: str = "RS"):
    """Divide each summary's AUCs by the baseline's on the same dataset.

    Returns ``(normalized_summaries, improvements)`` where ``improvements``
    maps strategy -> {field: percent}.
    """
    summaries = list(summaries)
    base = [s for s in summaries if s.strategy == baseline]
    if not base:
        raise MissingBaseline(f"no {baseline} summary to normalise against")
    base = base[0]
    if len({s.dataset for s in summaries}) > 1:
        raise ValueError("normalize_and_improve expects summaries from a single dataset")
    out, improvements = [], {}
    for s in summaries:
        norm = {}
        for f in AucSummary.FIELDS:
            denom = getattr(base, f)
            if denom == 0.0:
                if f.endswith("_var") and getattr(s, f) == 0.0:
                    norm[f] = 1.0
                    continue
                raise ZeroBaseline(f"{baseline} {f} is zero on {s.dataset}")
            norm[f] = 1.0 if s is base else getattr(s, f) / denom
        out.append(replace(s, normalized=norm))
        improvements[s.strategy] = {f: improvement_percent(f, v) for f, v in norm.items()}
    return out, improvements


def t_cdf(t: float, df: float) -> float:
    """Student-t CDF through the regularized incomplete beta function."""
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    tail = 0.5 * special.betainc(df / 2.0, 0.5, df / (df + t * t))
    return float(tail if t < 0 else 1.0 - tail)


def welch_t(a, b) -> tuple[float, float]:
    """Welch t statistic for mean(a) - mean(b) and Welch-Satterthwaite degrees of freedom."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise TooFewSamples("each sample needs at least 2 values")
    va = a.var(ddof=1) / a.size
    vb = b.var(ddof=1) / b.size
    se2 = va + vb
    diff = a.mean() - b.mean()
    if se2 == 0.0:
        t = 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return t, float(a.size + b.size - 2)
    df = se2 * se2 / (va * va / (a.size - 1) + vb * vb / (b.size - 1))
    return float(diff / math.sqrt(se2)), float(df)


def ttest_one_tailed(a, b, alternative: str = "less") -> float:
    """p-value of the one-tailed Welch test.

    ``alternative="less"`` tests mean(a) < mean(b) (use for RMSE);
    ``"greater"`` tests mean(a) > mean(b) (use for CC).
    """
    t, df = welch_t(a, b)
    if alternative == "less":
        return t_cdf(t, df)
    if alternative == "greater":
        return t_cdf(-t, df)
    raise ValueError(f"alternative must be 'less' or 'greater', got {alternative!r}")
