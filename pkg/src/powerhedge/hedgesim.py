"""Self-financing hedge backtests and the friction-hedge optimiser.

A backtest starts the portfolio at the model price, resets holdings every
``rebalance_every`` steps from the strategy's weight rule and otherwise lets
the holdings ride.  The cash-like leg absorbs the difference between the
running portfolio value and the new risky holdings, so no money is injected.
The report holds ``payoff(S_T) - portfolio_T`` per path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .basic_assets import delta_exponent
from .core import MarketParams, ModelError, PathSet, PayoffSpec, bsm_closed_form, bsm_delta

StrategyKind = Literal[
    "stock_bond", "stock_power", "stock_bond_power_friction", "stock_power_jumpbond", "sv_stock_bond_volindex"
]
STRATEGY_KINDS = (
    "stock_bond", "stock_power", "stock_bond_power_friction", "stock_power_jumpbond", "sv_stock_bond_volindex"
)


@dataclass(frozen=True)
class StrategySpec:
    kind: StrategyKind
    rebalance_every: int = 1
    instrument_params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ModelError(f"unknown strategy kind {self.kind!r}; choose one of {', '.join(STRATEGY_KINDS)}")
        if int(self.rebalance_every) != self.rebalance_every or self.rebalance_every < 1:
            raise ModelError("rebalance_every must be a positive integer")


@dataclass(frozen=True)
class FrictionParams:
    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise ModelError("friction epsilon must lie in [0, 1)")


@dataclass
class HedgeReport:
    strategy: str
    errors: np.ndarray
    audit: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def summary(self) -> dict:
        e = self.errors
        q = np.quantile(e, [0.05, 0.5, 0.95])
        return {
            "n_paths": int(e.size),
            "mean": float(e.mean()),
            "rms": float(np.sqrt(np.mean(e * e))),
            "max_abs": float(np.abs(e).max()),
            "q05": float(q[0]),
            "q50": float(q[1]),
            "q95": float(q[2]),
            "audit": float(self.audit),
        }

    @property
    def rms(self) -> float:
        return self.summary["rms"]


# ---------------------------------------------------------------------------
# friction hedge
# ---------------------------------------------------------------------------


def power_asset_moments(params: MarketParams):
    """``(delta, mu_V, sigma_V)`` for ``V = S**delta`` under the real-world drift."""
    d = delta_exponent(params)
    return d, d * params.mu + 0.5 * d * (d - 1.0) * params.sigma**2, d * params.sigma


def friction_theta(params: MarketParams, friction: FrictionParams, S):
    """Published ratio ``theta(t, eps)``; the exact minimiser is ``a * theta / V``."""
    _, mu_v, sig_v = power_asset_moments(params)
    eps, mu, sig = friction.epsilon, params.mu, params.sigma
    den = (mu_v * (1 - eps)) ** 2 + (sig_v * (1 + eps)) ** 2
    if den == 0:
        raise ModelError("degenerate power asset: mu_V = sigma_V = 0")
    return (mu * mu_v * (1 - eps) - sig * sig_v * (1 + eps)) / den * eps * np.asarray(S, dtype=float)


def friction_error(c, a, params: MarketParams, friction: FrictionParams, S, V):
    """Squared hedging error ``phi(c)`` of the stock/power-asset hedge under friction."""
    _, mu_v, sig_v = power_asset_moments(params)
    eps, mu, sig = friction.epsilon, params.mu, params.sigma
    return (a * sig * eps * S + c * sig_v * (1 + eps) * V) ** 2 + (-a * mu * eps * S + c * mu_v * (1 - eps) * V) ** 2


def friction_optimal_weights(a, params: MarketParams, friction: FrictionParams, S, V):
    """Units ``c*`` of the power asset minimising :func:`friction_error` for stock holding ``a``."""
    V = np.asarray(V, dtype=float)
    if np.any(V <= 0):
        raise ModelError("friction_optimal_weights needs V > 0")
    out = np.asarray(a, dtype=float) * friction_theta(params, friction, S) / V
    return out[()] if out.ndim == 0 else out


def friction_psi(params: MarketParams, friction: FrictionParams, S, mode: Literal["corrected", "literal"] = "corrected"):
    """Stock-holding multiplier ``Psi``: ``a = dY/dx * Psi``."""
    _, _, sig_v = power_asset_moments(params)
    S = np.asarray(S, dtype=float)
    V = S ** delta_exponent(params)
    th = friction_theta(params, friction, S)
    eps, sig = friction.epsilon, params.sigma
    if mode == "corrected":
        power_leg = th * sig_v * (1 + eps)
    elif mode == "literal":
        power_leg = th * sig_v * (1 + eps) * V
    else:
        raise ModelError(f"unknown friction mode {mode!r}")
    return sig * S / (sig * (1 + eps) * S + power_leg)


def friction_cost_rate(params: MarketParams, friction: FrictionParams, S, mode: Literal["corrected", "literal"] = "corrected"):
    """Dynamic friction cost rate ``Gamma``; the PDE drift on ``x dY/dx`` is ``r + Gamma``.

    ``corrected`` follows from matching drifts with the exact minimiser and is 0
    at ``eps = 0``.  ``literal`` is the published bracket, equal to ``1 - r`` at
    ``eps = 0``.
    """
    d, mu_v, _ = power_asset_moments(params)
    S = np.asarray(S, dtype=float)
    eps, mu, r = friction.epsilon, params.mu, params.r
    th = friction_theta(params, friction, S)
    psi = friction_psi(params, friction, S, mode)
    if mode == "corrected":
        return mu - r - psi * (mu * (1 - eps) - r + th / S * (mu_v * (1 - eps) - r))
    Sd1 = S ** (d - 1.0)
    return mu - r + psi * (1.0 - mu * (1 - eps) + r * th * Sd1 - th * mu_v * (1 - eps) * Sd1)


def prop2_weights(Y, dY_dx, S, delta: float):
    """Stock units ``a`` and ``S**delta`` units ``b`` with ``a S + b S**delta = Y`` and matched delta."""
    Y, dY_dx, S = (np.asarray(v, dtype=float) for v in (Y, dY_dx, S))
    a = dY_dx / (1.0 - delta) - delta / (1.0 - delta) * Y / S
    b = S ** (1.0 - delta) / (1.0 - delta) * (Y / S - dY_dx)
    return a, b


# ---------------------------------------------------------------------------
# pricing sources
# ---------------------------------------------------------------------------


class ClosedFormPricer:
    """Black-Scholes value and delta (calls and puts)."""

    def __init__(self, params: MarketParams, payoff: PayoffSpec, T: float):
        if payoff.kind not in ("call", "put"):
            raise ModelError("closed-form pricing needs a call or put payoff")
        self.params, self.payoff, self.T = params, payoff, T

    def value(self, S, t, state=None):
        if t >= self.T:
            return self.payoff(S)
        return bsm_closed_form(self.params, self.payoff, S, self.T, t)

    def gradient(self, S, t, state=None):
        return bsm_delta(self.params, self.payoff, S, self.T, t), None


class SurfacePricer:
    """Interpolated finite-difference surface (a 1D or 2D solution)."""

    def __init__(self, solution):
        self.solution = solution
        self.two_d = hasattr(solution, "gradient")

    def value(self, S, t, state=None):
        if self.two_d:
            if state is None:
                raise ModelError("a two-variable surface needs the second state channel")
            return self.solution(S, state, t)
        return self.solution(S, t)

    def gradient(self, S, t, state=None):
        if self.two_d:
            if state is None:
                raise ModelError("a two-variable surface needs the second state channel")
            return self.solution.gradient(S, state, t)
        return self.solution.delta(S, t), None


# ---------------------------------------------------------------------------
# backtest
# ---------------------------------------------------------------------------


def _market(strategy: StrategySpec, paths: PathSet):
    ip = strategy.instrument_params
    params = ip.get("params")
    r = ip.get("r", params.r if params is not None else paths.meta.get("r"))
    if r is None:
        raise ModelError(f"strategy {strategy.kind} needs a rate: pass instrument_params['r'] or 'params'")
    return params, float(r)


def backtest_hedge(strategy: StrategySpec, paths: PathSet, payoff: PayoffSpec, pricer) -> HedgeReport:
    """Run one hedging strategy along every path and collect terminal replication errors.

    ``instrument_params`` by kind:

    * ``stock_bond``: ``r`` (or ``params``).
    * ``stock_power``: ``params`` (MarketParams; fixes ``delta``).  No bond.
    * ``stock_bond_power_friction``: ``params``, ``epsilon``, optional ``mode``.
      Paths must be GBM; the hedger's stock and power asset follow the
      inferior dynamics driven by the same Brownian path.
    * ``stock_power_jumpbond``: ``params`` (sigma, r).  Needs ``K`` (and for the
      jump-size model ``z``) channels; holds stock, ``S**delta`` and the jump
      bond with drift ``r``, matched in value, diffusion and jump exposure.
    * ``sv_stock_bond_volindex``: ``r``.  Needs ``V``; pricer is a 2D surface.
    """
    kind = strategy.kind
    S = paths["S"]
    n_paths, n1 = S.shape
    n = n1 - 1
    t = paths.times
    params, r = _market(strategy, paths)
    beta = np.exp(r * (t - t[0]))
    every = int(strategy.rebalance_every)
    ip = strategy.instrument_params

    state = None
    if kind == "sv_stock_bond_volindex":
        state = paths["V"]
    if kind == "stock_power_jumpbond" and "z" in paths:
        state = paths["z"]

    def st(k):
        return None if state is None else state[:, k]

    # traded asset prices, shape (n_assets, n_paths, n + 1)
    if kind == "stock_bond":
        assets = np.stack([S, np.broadcast_to(beta, S.shape)])
    elif kind == "stock_power":
        if params is None:
            raise ModelError("stock_power needs instrument_params['params']")
        d = delta_exponent(params)
        assets = np.stack([S, S**d])
    elif kind == "stock_bond_power_friction":
        if params is None or "epsilon" not in ip:
            raise ModelError("stock_bond_power_friction needs 'params' and 'epsilon'")
        fr = FrictionParams(float(ip["epsilon"]))
        mode = ip.get("mode", "corrected")
        d, mu_v, sig_v = power_asset_moments(params)
        mu = params.mu if paths.meta.get("measure", "P") == "P" else r
        eps, sig = fr.epsilon, params.sigma
        tt = (t - t[0])[None, :]
        Bt = (np.log(S / S[:, :1]) - (mu - 0.5 * sig * sig) * tt) / sig
        S_h = S[:, :1] * np.exp((mu * (1 - eps) - 0.5 * (sig * (1 + eps)) ** 2) * tt + sig * (1 + eps) * Bt)
        V_h = S[:, :1] ** d * np.exp((mu_v * (1 - eps) - 0.5 * (sig_v * (1 + eps)) ** 2) * tt + sig_v * (1 + eps) * Bt)
        assets = np.stack([S_h, np.broadcast_to(beta, S.shape), V_h])
    elif kind == "stock_power_jumpbond":
        if params is None:
            raise ModelError("stock_power_jumpbond needs 'params' (sigma, r)")
        psi = paths.meta.get("psi")
        if psi is None or "K" not in paths:
            raise ModelError("stock_power_jumpbond needs jump paths with mark channel 'K'")
        d = delta_exponent(params)
        M = np.exp(r * (t - t[0]))[None, :] * np.power(float(psi), paths["K"])
        assets = np.stack([S, S**d, M])
    else:
        V = paths["V"]
        assets = np.stack([S, np.broadcast_to(beta, S.shape), V])

    Pi = np.empty((n_paths, n1))
    Pi[:, 0] = pricer.value(S[:, 0], t[0], st(0))
    h = None
    audit = 0.0
    for k in range(n):
        if k % every == 0:
            Sk = S[:, k]
            gx, gy = pricer.gradient(Sk, t[k], st(k))
            P = Pi[:, k]
            if kind == "stock_bond":
                h = np.stack([gx, (P - gx * Sk) / beta[k]])
            elif kind == "stock_power":
                a = (gx - d * P / Sk) / (1.0 - d)
                h = np.stack([a, (P - a * Sk) / assets[1, :, k]])
            elif kind == "stock_bond_power_friction":
                a = gx * friction_psi(params, fr, Sk, mode)
                c = friction_optimal_weights(a, params, fr, Sk, Sk**d)
                b = (P - a * assets[0, :, k] - c * assets[2, :, k]) / beta[k]
                h = np.stack([a, b, c])
            elif kind == "stock_power_jumpbond":
                z = np.ones(n_paths) if state is None else state[:, k]
                jf = 1.0 + z * (float(psi) - 1.0)
                Y = pricer.value(Sk, t[k], st(k))
                Yj = pricer.value(Sk * jf, t[k], st(k))
                dexp = gx * params.sigma * Sk
                if gy is not None:
                    dexp = dexp + gy * paths.meta.get("b_z", 0.0) * z
                Vk, Mk = assets[1, :, k], assets[2, :, k]
                A = np.zeros((n_paths, 3, 3))
                A[:, 0] = np.stack([Sk, Vk, Mk], axis=1)
                A[:, 1] = np.stack([params.sigma * Sk, d * params.sigma * Vk, np.zeros(n_paths)], axis=1)
                A[:, 2] = np.stack([Sk * (jf - 1.0), Vk * (jf**d - 1.0), Mk * (float(psi) - 1.0)], axis=1)
                rhs = np.stack([P, dexp, Yj - Y], axis=1)
                h = np.linalg.solve(A, rhs[..., None])[..., 0].T
            else:
                h = np.stack([gx, (P - gx * Sk - gy * assets[2, :, k]) / beta[k], gy])
        Pi[:, k + 1] = np.einsum("ap,ap->p", h, assets[:, :, k + 1])
        # self-financing check: value change equals holdings times price change
        resid = Pi[:, k + 1] - Pi[:, k] - np.einsum("ap,ap->p", h, assets[:, :, k + 1] - assets[:, :, k])
        audit = max(audit, float(np.max(np.abs(resid) / (1 + np.abs(Pi[:, k + 1])))))
    errors = payoff(S[:, -1]) - Pi[:, -1]
    return HedgeReport(kind, errors, audit, {"rebalances": -(-n // every), "portfolio": Pi})
