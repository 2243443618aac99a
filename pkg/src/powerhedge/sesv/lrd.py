"""Descriptive long-range-dependence statistics: sample ACF and the aggregated-variance Hurst estimate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ModelError


@dataclass
class LrdReport:
    lags: np.ndarray
    acf: np.ndarray
    block_sizes: np.ndarray
    block_variances: np.ndarray
    variance_plot_slope: float
    hurst_estimate: float
    n: int


def sample_acf(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased sample autocorrelations at lags ``0..max_lag`` via FFT."""
    x = np.asarray(x, dtype=float) - np.mean(x)
    n = x.size
    f = np.fft.rfft(x, 2 * n)
    ac = np.fft.irfft(f * np.conj(f))[: max_lag + 1]
    return ac / ac[0]


def lrd_diagnostics(series, max_lag: int = 100, n_sizes: int = 20) -> LrdReport:
    """ACF to ``max_lag`` and the log-log slope of block-mean variance against block size.

    Block sizes run log-uniformly from 10 to ``n / 100``; the Hurst estimate
    is ``1 + slope / 2`` (slope ``-1`` for short memory).
    """
    x = np.asarray(series, dtype=float).ravel()
    if x.size < 256:
        raise ModelError(f"lrd_diagnostics needs at least 256 observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ModelError("series contains non-finite values")
    if np.var(x) == 0.0:
        raise ModelError("degenerate variance: series is constant")
    n = x.size
    max_lag = min(max_lag, n - 1)
    acf = sample_acf(x, max_lag)
    hi = max(n // 100, 20)
    sizes = np.unique(np.round(np.logspace(np.log10(10), np.log10(hi), n_sizes)).astype(int))
    variances = np.empty(sizes.size)
    for j, m in enumerate(sizes):
        k = n // m
        means = x[: k * m].reshape(k, m).mean(axis=1)
        variances[j] = means.var(ddof=1)
    slope = float(np.polyfit(np.log(sizes), np.log(variances), 1)[0])
    return LrdReport(np.arange(max_lag + 1), acf, sizes, variances, slope, 1.0 + 0.5 * slope, n)
