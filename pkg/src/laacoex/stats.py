"""Batch-means confidence intervals for ratio estimators."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy import stats

__all__ = ["Estimate", "batch_ratio", "relative_error_pct", "total_variation"]


class Estimate(NamedTuple):
    value: float
    half_width: float
    batch_values: tuple


def batch_ratio(numerators, denominators, confidence: float = 0.95) -> Estimate:
    """Point estimate ``sum(num) / sum(den)`` with a t-based batch-means half-width.

    Each batch contributes the ratio of its own counts; batches with a zero
    denominator contribute 0, matching the convention for the point estimate.
    """
    num = np.asarray(numerators, dtype=float)
    den = np.asarray(denominators, dtype=float)
    if num.shape != den.shape or num.ndim != 1:
        raise ValueError("numerators and denominators must be 1-D arrays of equal length")
    total = den.sum()
    value = float(num.sum() / total) if total > 0 else 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    b = len(ratios)
    if b < 2:
        return Estimate(value, float("nan"), tuple(ratios.tolist()))
    sd = float(np.std(ratios, ddof=1))
    t = float(stats.t.ppf(0.5 + confidence / 2, df=b - 1))
    return Estimate(value, t * sd / np.sqrt(b), tuple(ratios.tolist()))


def relative_error_pct(estimate: float, reference: float) -> float | None:
    """``|estimate - reference| / reference * 100``; ``None`` when the reference is not positive."""
    if not reference > 0:
        return None
    return abs(estimate - reference) / reference * 100.0


def total_variation(p, q) -> float:
    """Total-variation distance between two mappings over a common key set."""
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)
