"""Fractional Brownian motion by circulant embedding, and its geometric exponential."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ModelError, PathSet, SeedSpec, TimeGrid

DENSE_FALLBACK_MAX = 4096


@dataclass(frozen=True)
class FbmParams:
    H: float
    n: int
    dt: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.H < 1.0:
            raise ModelError("Hurst index H must lie in (0, 1)")
        if int(self.n) != self.n or self.n < 2:
            raise ModelError("FBM sample length n must be an integer >= 2")
        if not self.dt > 0:
            raise ModelError("dt must be positive")


def fgn_autocovariance(H: float, k) -> np.ndarray:
    """Autocovariance of unit-step fractional Gaussian noise at integer lags ``k``."""
    k = np.abs(np.asarray(k, dtype=float))
    return 0.5 * (np.abs(k + 1) ** (2 * H) - 2 * k ** (2 * H) + np.abs(k - 1) ** (2 * H))


def _circulant_eigs(H: float, n: int) -> np.ndarray:
    g = fgn_autocovariance(H, np.arange(n + 1))
    row = np.concatenate([g, g[-2:0:-1]])
    return np.fft.fft(row).real


def fgn_sample(H: float, n: int, gen: np.random.Generator, method: str = "auto") -> np.ndarray:
    """``n`` unit-step fGn values: circulant embedding, dense Cholesky if the embedding is not PSD."""
    if method in ("auto", "circulant"):
        lam = _circulant_eigs(H, n)
        if lam.min() >= -1e-10 * lam.max():
            m = lam.size
            w = gen.standard_normal(m) + 1j * gen.standard_normal(m)
            x = np.fft.fft(np.sqrt(np.maximum(lam, 0.0) / m) * w)
            return x.real[:n]
        if method == "circulant":
            raise ModelError(f"circulant embedding not PSD for H={H}, n={n}")
    if n > DENSE_FALLBACK_MAX:
        raise ModelError(f"dense fallback limited to n <= {DENSE_FALLBACK_MAX}, got n={n}")
    idx = np.arange(n)
    cov = fgn_autocovariance(H, idx[:, None] - idx[None, :])
    L = np.linalg.cholesky(cov)
    return L @ gen.standard_normal(n)


def fbm_generate(params: FbmParams, n_paths: int, seed: SeedSpec, *, method: str = "auto") -> PathSet:
    """Paths of ``B^H`` on ``t = 0, dt, ..., n dt`` (channel ``BH``; fGn increments in ``dBH``).

    Each path draws from its own stream keyed by the path index.
    """
    if int(n_paths) != n_paths or n_paths < 1:
        raise ModelError("n_paths must be a positive integer")
    H, n, dt = params.H, params.n, params.dt
    scale = dt**H
    inc = np.empty((n_paths, n))
    for i in range(n_paths):
        inc[i] = scale * fgn_sample(H, n, seed.generator("fbm", i), method)
    B = np.zeros((n_paths, n + 1))
    np.cumsum(inc, axis=1, out=B[:, 1:])
    grid = TimeGrid(0.0, n * dt, n)
    dB = np.concatenate([inc, np.zeros((n_paths, 1))], axis=1)
    return PathSet(grid, {"BH": B, "dBH": dB}, seed, {"model": "fbm", "H": H})


def fgbm_path(mu_H: float, sigma_H: float, D0: float, fbm: PathSet) -> np.ndarray:
    """``D_t = D0 exp(mu_H t + sigma_H B^H_t)``."""
    if not D0 > 0:
        raise ModelError("D0 must be positive")
    t = fbm.times - fbm.grid.t0
    return D0 * np.exp(mu_H * t[None, :] + sigma_H * fbm["BH"])
