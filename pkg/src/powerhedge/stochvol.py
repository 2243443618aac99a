"""Stochastic volatility driven by an OU factor, the vol-of-vol extension and MC pricing.

Under ``P`` the factor ``V`` is an Ornstein-Uhlenbeck process.  When ``V`` is
itself a traded index its risk-neutral drift is ``r V``, so under ``Q`` both
``S`` and ``V`` grow at the riskless rate.  ``sigma(V)`` maps the factor to the
stock volatility; presets cover the usual choices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .core import Measure, ModelError, PathSet, PayoffSpec, SeedSpec, TimeGrid, record_index, run_blocks

Coef = Union[float, Callable]


def sigma_preset(name: str, level: float | None = None) -> Callable:
    """Volatility map ``sigma(y)``: ``exp`` (default), ``abs``, ``sqrtplus`` or ``const`` (needs ``level``)."""
    if name == "exp":
        return np.exp
    if name == "abs":
        return np.abs
    if name == "sqrtplus":
        return lambda y: np.sqrt(np.maximum(y, 0.0))
    if name == "const":
        if level is None or not level >= 0:
            raise ModelError("sigma preset 'const' needs a level >= 0")
        return lambda y: np.full(np.shape(y), float(level))
    raise ModelError(f"unknown sigma preset {name!r}; choose exp, abs, sqrtplus or const")


SIGMA_PRESETS = ("exp", "abs", "sqrtplus", "const")


@dataclass(frozen=True)
class SvParams:
    """OU factor ``dV = alpha (m - V) dt + phi dW`` with ``dB dW = rho dt`` and stock vol ``sigma(V)``."""

    alpha: float
    m: float
    phi: float
    rho: float
    sigma_fn: str | Callable = "exp"
    sigma_level: float | None = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ModelError("alpha must be positive")
        if self.phi < 0:
            raise ModelError("phi must be >= 0")
        if not -1.0 < self.rho < 1.0:
            raise ModelError("rho must lie in (-1, 1)")
        if isinstance(self.sigma_fn, str):
            sigma_preset(self.sigma_fn, self.sigma_level)

    def sigma(self, y):
        fn = sigma_preset(self.sigma_fn, self.sigma_level) if isinstance(self.sigma_fn, str) else self.sigma_fn
        return fn(np.asarray(y, dtype=float))


@dataclass(frozen=True)
class PremiumSpec:
    """Drift inputs for the premium-parameterised equation; constants or functions of ``t``."""

    eta: Coef = 0.0
    beta_v_mvol: Coef = 0.0
    beta_v_m: Coef = 0.0
    theta_m: Coef = 0.0
    theta_v: Coef = 0.0

    @staticmethod
    def _at(c, t):
        return c(t) if callable(c) else c

    def y_drift_rate(self, t: float) -> float:
        """Factor multiplying ``y`` in the ``dY/dy`` term: ``eta + beta_vmvol theta_v - beta_vm theta_m``."""
        a = self._at
        return a(self.eta, t) + a(self.beta_v_mvol, t) * a(self.theta_v, t) - a(self.beta_v_m, t) * a(self.theta_m, t)


def ou_transition(V, alpha: float, m: float, phi: float, dt: float):
    """Exact conditional mean and variance of the OU factor after ``dt``."""
    decay = math.exp(-alpha * dt)
    mean = m + (np.asarray(V, dtype=float) - m) * decay
    var = phi * phi * (1.0 - decay * decay) / (2.0 * alpha)
    return mean, var


def _linear_growth_transition(V, r: float, phi: float, dt: float):
    """Exact step of ``dV = r V dt + phi dW``."""
    growth = math.exp(r * dt)
    var = phi * phi * dt if r == 0 else phi * phi * (growth * growth - 1.0) / (2.0 * r)
    return V * growth, var


def simulate_sv(
    params: SvParams,
    mu: float,
    S0: float,
    V0: float,
    grid: TimeGrid,
    n_paths: int,
    seed: SeedSpec,
    measure: Measure = "P",
    *,
    r: float = 0.0,
    record_every: int = 1,
    n_workers: int = 1,
) -> PathSet:
    """Paths of ``(S, V)``; ``V`` is stepped exactly, ``S`` lognormally with ``sigma(V)`` frozen over the step."""
    if not S0 > 0:
        raise ModelError("S0 must be positive")
    if measure not in ("P", "Q"):
        raise ModelError(f"unknown measure {measure!r}")
    drift = mu if measure == "P" else r
    n, dt = grid.n_steps, grid.dt
    rec = record_index(grid, record_every)
    cr = math.sqrt(1.0 - params.rho**2)

    def block(b, m_):
        z1 = seed.block_normals("dB", b, (n,), m_)
        z2 = params.rho * z1 + cr * seed.block_normals("dW", b, (n,), m_)
        V = np.empty((n + 1, m_))
        V[0] = V0
        logS = np.empty((n + 1, m_))
        logS[0] = math.log(S0)
        for k in range(n):
            sig = params.sigma(V[k])
            logS[k + 1] = logS[k] + (drift - 0.5 * sig * sig) * dt + sig * math.sqrt(dt) * z1[k]
            if measure == "P":
                mean, var = ou_transition(V[k], params.alpha, params.m, params.phi, dt)
            else:
                mean, var = _linear_growth_transition(V[k], r, params.phi, dt)
            V[k + 1] = mean + math.sqrt(var) * z2[k]
        return {"S": np.exp(logS[rec]).T, "V": V[rec].T}

    ch = run_blocks(block, n_paths, n_workers)
    meta = {"model": "sv", "measure": measure, "r": r, "sv": params, "mu": mu}
    return PathSet(grid.coarsen(record_every), ch, seed, meta)


def sv_hedge_weights(Y, dY_dx, dY_dy, S, V, beta):
    """Stock, bond and vol-index units ``(a, b, c)`` with ``a S + b beta + c V = Y``."""
    beta = np.asarray(beta, dtype=float)
    if np.any(beta <= 0):
        raise ModelError("bond level must be positive")
    a = np.asarray(dY_dx, dtype=float)
    c = np.asarray(dY_dy, dtype=float)
    b = (np.asarray(Y, dtype=float) - a * np.asarray(S) - c * np.asarray(V)) / beta
    return a, b, c


# ---------------------------------------------------------------------------
# vol-of-vol model
# ---------------------------------------------------------------------------


def _const(c):
    return lambda S, V, v, t: c


@dataclass(frozen=True)
class VovParams:
    """Stock vol ``sigma(V)``; ``dV = alpha_fn dt + phi_fn(v) dB^V``; ``dv = b_fn dt + psi_fn dB^v``.

    Drift and noise coefficients are constants or callables of ``(S, V, v, t)``
    (``phi_fn`` of ``v`` only).  Correlations: ``rho_V`` between stock and
    ``V`` noise, ``rho_v`` stock/``v`` and ``varrho`` between ``V`` and ``v``.
    """

    mu_fn: Coef = 0.05
    alpha_fn: Coef | None = None
    b_fn: Coef = 0.0
    psi_fn: Coef = 0.0
    phi_fn: Coef = 0.3
    rho_V: float = 0.0
    rho_v: float = 0.0
    varrho: float = 0.0
    sigma_fn: str | Callable = "exp"
    sigma_level: float | None = None
    ou_alpha: float = 1.0
    ou_m: float = 0.0

    def __post_init__(self):
        for name in ("rho_V", "rho_v", "varrho"):
            if not -1.0 < getattr(self, name) < 1.0:
                raise ModelError(f"{name} must lie in (-1, 1)")
        self.correlation_factor()

    def correlation(self) -> np.ndarray:
        return np.array([[1.0, self.rho_V, self.rho_v], [self.rho_V, 1.0, self.varrho], [self.rho_v, self.varrho, 1.0]])

    def correlation_factor(self) -> np.ndarray:
        C = self.correlation()
        w, Q = np.linalg.eigh(C)
        if w.min() < -1e-12:
            raise ModelError(f"non-PSD correlations: smallest eigenvalue {w.min():.3g}")
        try:
            return np.linalg.cholesky(C)
        except np.linalg.LinAlgError:
            return Q * np.sqrt(np.maximum(w, 0.0))

    def fn(self, name):
        c = getattr(self, name)
        if name == "alpha_fn" and c is None:
            a, m = self.ou_alpha, self.ou_m
            return lambda S, V, v, t: a * (m - V)
        if name == "phi_fn":
            return c if callable(c) else (lambda v, cc=c: cc)
        return c if callable(c) else _const(c)

    def sigma(self, y):
        fn = sigma_preset(self.sigma_fn, self.sigma_level) if isinstance(self.sigma_fn, str) else self.sigma_fn
        return fn(np.asarray(y, dtype=float))


def simulate_vov(
    params: VovParams,
    S0: float,
    V0: float,
    v0: float,
    grid: TimeGrid,
    n_paths: int,
    seed: SeedSpec,
    measure: Measure = "P",
    *,
    r: float = 0.0,
    record_every: int = 1,
    n_workers: int = 1,
) -> PathSet:
    """Euler steps for ``V`` and ``v``, lognormal step for ``S``; under ``Q`` every drift is ``r * level``."""
    if not S0 > 0:
        raise ModelError("S0 must be positive")
    if measure not in ("P", "Q"):
        raise ModelError(f"unknown measure {measure!r}")
    L = params.correlation_factor()
    n, dt = grid.n_steps, grid.dt
    sq = math.sqrt(dt)
    rec = record_index(grid, record_every)
    t_nodes = grid.nodes
    mu_f, a_f, b_f, psi_f, phi_f = (params.fn(k) for k in ("mu_fn", "alpha_fn", "b_fn", "psi_fn", "phi_fn"))

    def block(b, m_):
        e = np.stack([seed.block_normals(ch, b, (n,), m_) for ch in ("dB", "dBV", "dBv")])
        z = np.einsum("ij,jkm->ikm", L, e)
        S = np.empty((n + 1, m_))
        V = np.empty((n + 1, m_))
        v = np.empty((n + 1, m_))
        S[0], V[0], v[0] = S0, V0, v0
        for k in range(n):
            t = t_nodes[k]
            if measure == "P":
                mu = mu_f(S[k], V[k], v[k], t)
                aV = a_f(S[k], V[k], v[k], t)
                bv = b_f(S[k], V[k], v[k], t)
            else:
                mu, aV, bv = r, r * V[k], r * v[k]
            sig = params.sigma(V[k])
            S[k + 1] = S[k] * np.exp((mu - 0.5 * sig * sig) * dt + sig * sq * z[0, k])
            V[k + 1] = V[k] + aV * dt + phi_f(v[k]) * sq * z[1, k]
            v[k + 1] = v[k] + bv * dt + psi_f(S[k], V[k], v[k], t) * sq * z[2, k]
        return {"S": S[rec].T, "V": V[rec].T, "v": v[rec].T}

    ch = run_blocks(block, n_paths, n_workers)
    return PathSet(grid.coarsen(record_every), ch, seed, {"model": "vov", "measure": measure, "r": r})


def mc_price(paths: PathSet, payoff: PayoffSpec, r: float | None = None):
    """Discounted mean terminal payoff and its standard error."""
    S = paths["S"]
    if S.shape[0] < 2:
        raise ModelError("mc_price needs at least two paths")
    if r is None:
        r = paths.meta["r"]
    disc = math.exp(-r * (paths.grid.T - paths.grid.t0))
    pay = disc * payoff(S[:, -1])
    return float(pay.mean()), float(pay.std(ddof=1) / math.sqrt(len(pay)))
