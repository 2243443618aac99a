"""Perpetual power assets ``S**zeta * beta**gamma`` and the basic-asset ladder.

A power asset is tradable in the Black-Scholes market exactly when its bond
exponent is ``gamma = (1 - zeta) * (r + zeta * sigma**2 / 2) / r``; with that
choice the price discounted by the bond is a martingale under Q.  The special
member ``zeta = delta = -2 r / sigma**2`` needs no bond factor at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import MarketParams, ModelError, PathSet


def gamma_exponent(zeta: float, params: MarketParams) -> float:
    if params.r == 0:
        raise ModelError("gamma undefined at zero rate")
    return (1.0 - zeta) * (params.r + 0.5 * zeta * params.sigma**2) / params.r


def delta_exponent(params: MarketParams) -> float:
    return -2.0 * params.r / params.sigma**2


@dataclass(frozen=True)
class PowerAsset:
    """Tradable perpetual derivative with price ``S_t**zeta * exp(r * gamma * t)``.

    Build through :meth:`for_market` (or :func:`basic_asset`) so that ``gamma``
    is the martingale exponent of the market it trades in.
    """

    zeta: float
    gamma: float
    infinite_order: bool = False

    @classmethod
    def for_market(cls, zeta: float, params: MarketParams) -> "PowerAsset":
        return cls(float(zeta), gamma_exponent(zeta, params))

    @classmethod
    def bondless(cls, params: MarketParams) -> "PowerAsset":
        return cls(delta_exponent(params), 0.0, infinite_order=True)

    def check(self, params: MarketParams, tol: float = 1e-12) -> None:
        expected = 0.0 if self.infinite_order else gamma_exponent(self.zeta, params)
        if self.infinite_order and abs(self.zeta - delta_exponent(params)) > tol:
            raise ModelError("order-infinity asset must use zeta = -2r/sigma^2")
        if abs(self.gamma - expected) > tol * max(1.0, abs(expected)):
            raise ModelError(f"gamma={self.gamma} is not the martingale exponent {expected} for zeta={self.zeta}")

    def price(self, S, t, r: float):
        S = np.asarray(S, dtype=float)
        if np.any(S <= 0):
            raise ModelError("power asset needs a strictly positive stock price")
        return S**self.zeta * np.exp(r * self.gamma * np.asarray(t, dtype=float))


INFINITE_ORDER = math.inf


def basic_asset(n: int | float, params: MarketParams) -> PowerAsset:
    """Basic asset of order ``n``: 0 is the bond, 1 the stock, ``n >= 2`` is ``V^(-n)``, ``inf`` is ``V^(delta)``."""
    if n == INFINITE_ORDER:
        return PowerAsset.bondless(params)
    if n < 0 or int(n) != n:
        raise ModelError(f"basic-asset order must be a non-negative integer or inf, got {n}")
    zeta = {0: 0.0, 1: 1.0}.get(int(n), -float(n))
    return PowerAsset.for_market(zeta, params)


@dataclass(frozen=True)
class MultiAssetParams:
    """Multi-asset Ito market; ``M``, ``Sigma`` and ``r`` may be constants or callables of ``(state, t)``."""

    M: np.ndarray | Callable
    Sigma: np.ndarray | Callable
    r: float | Callable

    @property
    def d(self) -> int:
        return len(np.atleast_1d(self._eval(self.M, None, 0.0)))

    @staticmethod
    def _eval(obj, state, t):
        return obj(state, t) if callable(obj) else obj

    def at(self, state, t):
        M = np.atleast_1d(np.asarray(self._eval(self.M, state, t), dtype=float))
        Sigma = np.atleast_2d(np.asarray(self._eval(self.Sigma, state, t), dtype=float))
        r = float(self._eval(self.r, state, t))
        return M, Sigma, r


def multi_delta_exponent(i: int, params: MultiAssetParams, state=None, t: float = 0.0) -> float:
    _, Sigma, r = params.at(state, t)
    norm2 = float(np.sum(Sigma[i] ** 2))
    if norm2 <= 0:
        raise ModelError(f"asset {i} has zero volatility row")
    return -2.0 * r / norm2


def market_price_of_risk(params: MultiAssetParams, state=None, t: float = 0.0) -> np.ndarray:
    M, Sigma, r = params.at(state, t)
    gram = Sigma @ Sigma.T
    if np.linalg.cond(gram) > 1e12:
        raise ModelError("Sigma Sigma^T is singular; market price of risk undefined")
    return Sigma.T @ np.linalg.solve(gram, M - r)


def power_asset_path(asset: PowerAsset | int | float, stock_paths: PathSet, params: MarketParams | float) -> PathSet:
    """Add a ``V`` channel holding the power-asset price along each stock path.

    ``asset`` may be a :class:`PowerAsset` or a basic-asset order (needs full
    :class:`MarketParams` to resolve gamma).
    """
    if not isinstance(asset, PowerAsset):
        if not isinstance(params, MarketParams):
            raise ModelError("resolving a basic-asset order needs MarketParams")
        asset = basic_asset(asset, params)
    r = params.r if isinstance(params, MarketParams) else float(params)
    S = stock_paths["S"]
    if np.any(S <= 0):
        raise ModelError("power asset needs a strictly positive stock channel")
    V = asset.price(S, stock_paths.times[None, :], r)
    out = stock_paths.with_channels(V=V)
    out.meta["asset"] = asset
    return out


def replication_weights(asset_zeta: float, S, beta, params: MarketParams):
    """Stock and bond units ``(a, b)`` replicating ``V = S**zeta * beta**gamma``."""
    S = np.asarray(S, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if np.any(S <= 0):
        raise ModelError("replication needs S > 0")
    if asset_zeta == 1.0:
        gamma = 0.0
    elif asset_zeta == delta_exponent(params):
        gamma = 0.0
    else:
        gamma = gamma_exponent(asset_zeta, params)
    V = S**asset_zeta * beta**gamma
    a = asset_zeta * S ** (asset_zeta - 1.0) * beta**gamma
    b = (V - a * S) / beta
    return a, b


def crr_vstar_exponent(S_k: float, S_km1: float, r: float, dt: float) -> float:
    if S_k == S_km1:
        raise ModelError("exponent undefined on flat step")
    return -r * S_k * dt / (S_k - S_km1)


def crr_vstar_price(S_k: float, S_km1: float, r: float, sigma: float, dt: float) -> float:
    """Price of the alternative lattice asset V^(*); defined only when its radicand is non-negative."""
    zeta = crr_vstar_exponent(S_k, S_km1, r, dt)
    rad = -sigma**2 * zeta / (2.0 * r) - 1.0
    if rad < 0:
        raise ModelError(f"V* undefined on this step: radicand {rad:.6g} < 0 (needs zeta_k <= -2r/sigma^2)")
    return (S_k + S_km1 * math.sqrt(rad)) ** zeta


def one_step_discounted_expectation(zeta: float, gamma: float, params: MarketParams, S: float, t: float, dt: float) -> float:
    """Closed-form ``E^Q[V_{t+dt} / beta_{t+dt} | S_t = S]`` from lognormal moments."""
    r, sig = params.r, params.sigma
    log_moment = zeta * (r - 0.5 * sig * sig) * dt + 0.5 * zeta * zeta * sig * sig * dt
    return S**zeta * math.exp(r * (gamma - 1.0) * (t + dt) + log_moment)


def martingale_statistic(asset_paths: PathSet, r: float | None = None):
    """Mean of ``V_T / beta_T - V_0``, its standard error and z-score."""
    V = asset_paths["V"]
    if V.shape[0] < 2:
        raise ModelError("martingale_statistic needs at least two paths")
    if r is None:
        r = asset_paths.meta["r"]
    t = asset_paths.times
    disc = V[:, -1] * math.exp(-r * t[-1]) - V[:, 0] * math.exp(-r * t[0])
    mean = float(disc.mean())
    se = float(disc.std(ddof=1) / math.sqrt(len(disc)))
    if se == 0.0:
        z = 0.0 if abs(mean) <= 1e-14 * max(1.0, float(np.abs(V[:, 0]).max())) else math.copysign(math.inf, mean)
    else:
        z = mean / se
    return mean, se, z
