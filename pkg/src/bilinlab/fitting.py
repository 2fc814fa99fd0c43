"""Least-squares fits of log2(y) against log2(x) (or against an index)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Fit:
    slope: float
    intercept: float
    residual: float  # root mean square of the log2 residuals


def _fit(t, y) -> Fit:
    t = np.asarray(t, float)
    y = np.asarray(y, float)
    if len(t) < 2:
        raise ValueError("a fit needs at least two points")
    if np.any(~np.isfinite(y)):
        raise ValueError("non-finite value in fit data")
    slope, intercept = np.polyfit(t, y, 1)
    res = y - (slope * t + intercept)
    return Fit(float(slope), float(intercept), float(np.sqrt(np.mean(res ** 2))))


def loglog_fit(x, y) -> Fit:
    """Slope of log2 y versus log2 x."""
    y = np.asarray(y, float)
    if np.any(y <= 0):
        raise ValueError("log fit needs positive values")
    return _fit(np.log2(np.asarray(x, float)), np.log2(y))


def dyadic_fit(k, y) -> Fit:
    """Slope of log2 y versus the dyadic index k (so y ~ 2^{slope k})."""
    y = np.asarray(y, float)
    if np.any(y <= 0):
        raise ValueError("log fit needs positive values")
    return _fit(np.asarray(k, float), np.log2(y))
