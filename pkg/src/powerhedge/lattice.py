"""CRR binomial lattice hedged with the stock and ``V = S**delta`` instead of the bond."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .basic_assets import delta_exponent
from .core import MarketParams, ModelError, PayoffSpec


@dataclass(frozen=True)
class CrrTree:
    params: MarketParams
    S0: float
    T: float
    n_steps: int

    @property
    def dt(self) -> float:
        return self.T / self.n_steps

    @property
    def u(self) -> float:
        return math.exp(self.params.sigma * math.sqrt(self.dt))

    @property
    def d(self) -> float:
        return math.exp(-self.params.sigma * math.sqrt(self.dt))

    @property
    def q(self) -> float:
        """First-order risk-neutral up-probability ``1/2 + (r - sigma^2/2) sqrt(dt) / (2 sigma)``."""
        sig = self.params.sigma
        return 0.5 + (self.params.r - 0.5 * sig * sig) / (2.0 * sig) * math.sqrt(self.dt)

    def level(self, k: int) -> np.ndarray:
        """Stock prices at level ``k``, ordered from the highest node down."""
        j = np.arange(k + 1)
        return self.S0 * np.exp(self.params.sigma * math.sqrt(self.dt) * (k - 2 * j))


def crr_build(params: MarketParams, S0: float, T: float, n_steps: int) -> CrrTree:
    if int(n_steps) != n_steps or n_steps < 1:
        raise ModelError("n_steps must be a positive integer")
    if not (S0 > 0 and T > 0):
        raise ModelError("crr_build needs S0 > 0 and T > 0")
    return CrrTree(params, float(S0), float(T), int(n_steps))


@dataclass(frozen=True)
class HedgePair:
    delta_stock: np.ndarray
    delta_power: np.ndarray


def crr_hedge_weights(Y_up, Y_dn, S_up, S_dn, delta: float) -> HedgePair:
    """Units of stock and of ``S**delta`` that zero ``Y - a S - b S**delta`` in both successor states."""
    Y_up, Y_dn, S_up, S_dn = (np.asarray(v, dtype=float) for v in (Y_up, Y_dn, S_up, S_dn))
    if np.any(S_up == S_dn):
        raise ModelError("degenerate lattice step: S_up == S_dn")
    P_up, P_dn = S_up**delta, S_dn**delta
    den = S_up * P_dn - P_up * S_dn
    if np.any(den == 0):
        raise ModelError("degenerate hedge denominator")
    a = (Y_up * P_dn - Y_dn * P_up) / den
    b = (S_up * Y_dn - S_dn * Y_up) / den
    return HedgePair(a, b)


def crr_price(
    tree: CrrTree,
    payoff: PayoffSpec,
    method: Literal["risk_neutral_q", "v_hedge"] = "risk_neutral_q",
    *,
    return_levels: bool = False,
):
    """Backward induction through the tree.

    ``risk_neutral_q`` discounts ``q Y+ + (1-q) Y-`` by ``exp(-r dt)`` each step.
    ``v_hedge`` sets each node value to the cost of the stock/``S**delta``
    portfolio that replicates both successors; no bond is traded.
    """
    q = tree.q
    if not 0.0 < q < 1.0:
        raise ModelError(f"lattice arbitrage violated: q={q:.6g} outside (0, 1); reduce dt")
    n = tree.n_steps
    Y = payoff(tree.level(n))
    levels = [Y] if return_levels else None
    disc = math.exp(-tree.params.r * tree.dt)
    delta = delta_exponent(tree.params)
    for k in range(n - 1, -1, -1):
        if method == "risk_neutral_q":
            Y = disc * (q * Y[:-1] + (1.0 - q) * Y[1:])
        elif method == "v_hedge":
            S_next = tree.level(k + 1)
            w = crr_hedge_weights(Y[:-1], Y[1:], S_next[:-1], S_next[1:], delta)
            S = tree.level(k)
            Y = w.delta_stock * S + w.delta_power * S**delta
        else:
            raise ModelError(f"unknown lattice method {method!r}")
        if return_levels:
            levels.append(Y)
    if return_levels:
        return levels[::-1]
    return float(Y[0])


def implied_step_weights(tree: CrrTree) -> tuple[float, float]:
    """Per-step state prices ``(w_up, w_dn)`` implied by replicating with stock and ``S**delta``.

    ``w_up + w_dn`` is the one-step discount factor and ``w_up / (w_up + w_dn)``
    the up-probability hidden inside the ``v_hedge`` recursion; comparing them
    with ``exp(-r dt)`` and :attr:`CrrTree.q` measures the lattice inconsistency.
    """
    delta = delta_exponent(tree.params)
    u, d = tree.u, tree.d
    den = u * d**delta - u**delta * d
    return (d**delta - d) / den, (u - u**delta) / den
