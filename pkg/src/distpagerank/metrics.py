"""Comparison metrics for rank vectors.

Undefined correlations (zero variance) are returned as ``nan``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import rankdata

from .exceptions import ValidationError


def _pair(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 1 or a.shape != b.shape:
        raise ValidationError(f"vectors must be 1-D with equal length, got {a.shape} and {b.shape}")
    return a, b


def l1_error(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.abs(a - b).sum())


def pearson(a, b) -> float:
    a, b = _pair(a, b)
    if a.size < 2:
        raise ValidationError("correlation needs at least two entries")
    da, db = a - a.mean(), b - b.mean()
    denom = math.sqrt(float(da @ da) * float(db @ db))
    if denom == 0.0:
        return math.nan
    return float(np.clip((da @ db) / denom, -1.0, 1.0))


def spearman(a, b) -> float:
    """Pearson correlation of average-tie ranks."""
    a, b = _pair(a, b)
    return pearson(rankdata(a), rankdata(b))


def slope_through_origin(x_true, x_approx) -> float:
    """Least-squares slope of ``x_approx`` against ``x_true`` with no intercept."""
    x_true, x_approx = _pair(x_true, x_approx)
    denom = float(x_true @ x_true)
    if denom == 0.0:
        raise ValidationError("x_true is identically zero")
    return float(x_true @ x_approx) / denom


def top_k_overlap(a, b, k: int) -> float:
    """Fraction of shared indices among the ``k`` largest entries of each."""
    a, b = _pair(a, b)
    if not 1 <= k <= a.size:
        raise ValidationError(f"k must lie in [1, {a.size}]")
    top_a = set(np.argsort(-a, kind="stable")[:k].tolist())
    top_b = set(np.argsort(-b, kind="stable")[:k].tolist())
    return len(top_a & top_b) / k


@dataclass
class ComparisonReport:
    l1_error: float
    pearson: float
    spearman: float
    slope: float
    top_k_overlap: float
    top_k: int

    def to_dict(self) -> dict:
        return asdict(self)


def compare(reference, approx, top_k: int = 10) -> ComparisonReport:
    """All metrics of ``approx`` against ``reference``."""
    reference, approx = _pair(reference, approx)
    k = min(top_k, reference.size)
    return ComparisonReport(
        l1_error(approx, reference),
        pearson(reference, approx),
        spearman(reference, approx),
        slope_through_origin(reference, approx),
        top_k_overlap(reference, approx, k),
        k,
    )
