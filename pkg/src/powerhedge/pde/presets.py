"""Coefficient packs turning each pricing equation into a solver problem.

Every builder returns a :class:`PdeProblem1D` or :class:`PdeProblem2D` in the
normal form documented in :mod:`powerhedge.pde.problem`.  Default x-domains
are symmetric in ``ln x`` around the strike, ``width`` standard deviations on
each side, so the strike sits on a grid node.
"""

from __future__ import annotations

import math
from typing import Callable, Literal

import numpy as np

from ..basic_assets import delta_exponent
from ..core import MarketParams, ModelError, PayoffSpec
from ..jumpdiff import JumpParams, solve_power_exponent
from ..stochvol import PremiumSpec, SvParams
from .problem import JumpTerm, PdeProblem1D, PdeProblem2D


def default_x_domain(payoff: PayoffSpec, sigma: float, T: float, width: float = 5.0, S0: float | None = None):
    if payoff.strike is not None:
        center = payoff.strike
    elif S0 is not None:
        center = S0
    else:
        center = 0.5 * (payoff.table_x[0] + payoff.table_x[-1])
    half = width * sigma * math.sqrt(T)
    if S0 is not None:
        half = max(half, abs(math.log(S0 / center)) + 3.0 * sigma * math.sqrt(T))
    return center * math.exp(-half), center * math.exp(half)


def bsm_problem(params: MarketParams, payoff: PayoffSpec, T: float, grid=(400, 400), x_domain=None, width=5.0):
    """Black-Scholes equation with no bond in the hedge (stock and ``S**delta``)."""
    x_domain = x_domain or default_x_domain(payoff, params.sigma, T, width)
    r = params.r
    return PdeProblem1D(r, r, params.sigma**2, payoff, x_domain, tuple(grid), T, label="bsm")


def dividend_problem(params: MarketParams, payoff: PayoffSpec, T: float, D_y: float, grid=(400, 400), x_domain=None, width=5.0):
    """Black-Scholes equation for a stock paying a continuous dividend yield ``D_y``."""
    x_domain = x_domain or default_x_domain(payoff, params.sigma, T, width)
    r = params.r
    return PdeProblem1D(r - D_y, r, params.sigma**2, payoff, x_domain, tuple(grid), T, label="dividend",
                        meta={"D_y": D_y, "D_y_power": delta_exponent(params) * D_y})


def state_dependent_problem(r_fn, sigma_fn, payoff: PayoffSpec, T: float, x_domain, grid=(400, 400)):
    """Black-Scholes equation with rate ``r(x, t)`` and volatility ``sigma(x, t)``."""
    def c2(x, t):
        return np.asarray(sigma_fn(x, t), dtype=float) ** 2
    return PdeProblem1D(r_fn, r_fn, c2, payoff, x_domain, tuple(grid), T, label="state_dependent")


def friction_problem(
    params: MarketParams,
    payoff: PayoffSpec,
    T: float,
    epsilon: float,
    mode: Literal["corrected", "literal"] = "corrected",
    grid=(400, 400),
    x_domain=None,
    width=5.0,
):
    """Hedger trading stock and ``S**delta`` at inferior dynamics; drift ``r + Gamma(x, eps)``.

    ``corrected`` uses the exact quadratic minimiser and reduces to Black-Scholes
    at ``eps = 0``; ``literal`` keeps the published cost-rate expression, whose
    value at ``eps = 0`` is ``1 - r``.
    """
    from ..hedgesim import FrictionParams, friction_cost_rate

    fr = FrictionParams(epsilon)
    x_domain = x_domain or default_x_domain(payoff, params.sigma, T, width)

    def drift(x, t):
        return params.r + friction_cost_rate(params, fr, x, mode)

    return PdeProblem1D(drift, params.r, params.sigma**2, payoff, x_domain, tuple(grid), T,
                        label=f"friction_{mode}", meta={"epsilon": epsilon})


def fractional_problem(params: MarketParams, payoff: PayoffSpec, T: float, grid=(400, 400), x_domain=None, width=5.0):
    """Price under the fractional "doping security" equation.

    The equation transports the second state only at rate ``r y`` and has no
    diffusion in it, so for terminal data independent of ``y`` the solution is
    independent of ``y`` and solves the Black-Scholes equation; this builder
    returns that exact one-dimensional reduction.
    """
    p = bsm_problem(params, payoff, T, grid, x_domain, width)
    return PdeProblem1D(p.drift, p.discount, p.diffusion, payoff, p.x_domain, p.grid, T, label="fractional")


def fractional_problem_2d(params: MarketParams, payoff: PayoffSpec, T: float, y_domain, grid=(200, 20, 200), x_domain=None, width=5.0):
    """Full two-variable form of the fractional equation (log grid in ``y``), for cross-checks."""
    x_domain = x_domain or default_x_domain(payoff, params.sigma, T, width)
    r = params.r
    return PdeProblem2D(r, lambda x, y, t: r * y, params.sigma**2, 0.0, 0.0, r, payoff, x_domain, y_domain,
                        tuple(grid), T, y_scale="log", label="fractional_2d")


def merton_problem(jump: JumpParams, sigma: float, r: float, payoff: PayoffSpec, T: float, grid=(400, 400), x_domain=None, width=6.0):
    """Merton's risk-neutral PIDE: jump compensated at ``-lam kappa``, jump risk unpriced."""
    x_domain = x_domain or default_x_domain(payoff, sigma, T, width)
    jt = JumpTerm(jump.lam, jump.psi, jump.p, -jump.lam * jump.kappa)
    return PdeProblem1D(r, r, sigma**2, payoff, x_domain, tuple(grid), T, jump_term=jt, label="merton")


def prop8_coefficients(jump: JumpParams, sigma: float, r: float):
    """``(drift, jump_coefficient, solution)`` for the PIDE of a hedge using the power asset ``a S**rho``."""
    delta = -2.0 * r / sigma**2
    sol = solve_power_exponent(delta, jump.psi)
    rho, psi = sol.rho, jump.psi
    den = psi**rho + psi - 2.0
    if abs(den) < 1e-12:
        raise ModelError(f"prop8 coefficients singular: psi^rho + psi - 2 = {den:.3g}")
    g = jump.alpha - jump.lam * jump.kappa
    drift = g - (psi**rho - 1.0) / den * (g - r) - (psi - 1.0) / den * (g * rho + 0.5 * (rho - 1.0) * rho * sigma**2 - r)
    coef = -(rho - 1.0) * (g - 0.5 * rho * sigma**2)
    return drift, coef, sol


def prop8_problem(jump: JumpParams, sigma: float, r: float, payoff: PayoffSpec, T: float, grid=(400, 400), x_domain=None, width=6.0):
    """PIDE for the hedge with stock, bond and the jump-tradable power asset.

    The shifted-value term ``coef * (Y(psi x) - Y(x))`` enters with unit
    probability; ``coef`` may be negative.
    """
    drift, coef, sol = prop8_coefficients(jump, sigma, r)
    x_domain = x_domain or default_x_domain(payoff, sigma, T, width)
    jt = JumpTerm(coef, jump.psi, 1.0, 0.0)
    return PdeProblem1D(drift, r, sigma**2, payoff, x_domain, tuple(grid), T, jump_term=jt, label="prop8",
                        meta={"rho": sol.rho, "a": sol.a, "drift": drift, "jump_coefficient": coef})


# ---------------------------------------------------------------------------
# two-variable equations
# ---------------------------------------------------------------------------


def prop10_problem(
    jump: JumpParams,
    sigma: float,
    r: float,
    a_z: float,
    b_z: float,
    payoff: PayoffSpec,
    T: float,
    z_domain,
    grid=(200, 60, 200),
    x_domain=None,
    width=5.0,
    discount: Literal["r", "none"] = "r",
):
    """Jump-size-factor equation in ``(x, z)``, with ``z`` on a log grid.

    ``discount="r"`` adds the ``-r Y`` term required for a discounted price;
    ``"none"`` reproduces the displayed equation, which has no such term.
    """
    if discount not in ("r", "none"):
        raise ModelError(f"discount must be 'r' or 'none', got {discount!r}")
    x_domain = x_domain or default_x_domain(payoff, sigma, T, width)
    g = jump.alpha - jump.lam * jump.kappa
    return PdeProblem2D(
        r,
        lambda x, z, t: g * b_z / sigma * z - a_z,
        sigma**2,
        lambda x, z, t: (b_z * z) ** 2,
        lambda x, z, t: sigma * b_z * z,
        r if discount == "r" else 0.0,
        payoff, x_domain, z_domain, tuple(grid), T, y_scale="log", label="prop10",
    )


def _sv_common(sv: SvParams):
    def c2x(x, y, t):
        return sv.sigma(y) ** 2

    def c11(x, y, t):
        return sv.sigma(y) * sv.phi * sv.rho

    return c2x, c11, sv.phi**2


def sv_domains(sv: SvParams, payoff: PayoffSpec, V0: float, T: float, r: float, x_width=2.5, y_width=1.5):
    """Default ``(x_domain, y_domain)`` for the stochastic-volatility equations."""
    K = payoff.strike if payoff.strike is not None else 100.0
    return (K * math.exp(-x_width), K * math.exp(x_width)), (V0 - y_width, V0 + y_width)


def sv_eq33_problem(sv: SvParams, mu: float, r: float, gamma_fn: Callable | float | None, payoff: PayoffSpec, T: float,
                    x_domain, y_domain, grid=(200, 100, 100)):
    """Incomplete-market equation where the factor risk premium ``gamma(x, y, t)`` is an input."""
    if gamma_fn is None:
        raise ModelError("sv_eq33 needs a premium function gamma(x, y, t)")
    c2x, c11, c2y = _sv_common(sv)
    cr = math.sqrt(1.0 - sv.rho**2)

    def drift_y(x, y, t):
        g = gamma_fn(x, y, t) if callable(gamma_fn) else gamma_fn
        return sv.alpha * (sv.m - y) - sv.phi * (sv.rho * (mu - r) / sv.sigma(y) + g * cr)

    return PdeProblem2D(r, drift_y, c2x, c2y, c11, r, payoff, x_domain, y_domain, tuple(grid), T, label="sv_eq33")


def sv_eq37_problem(sv: SvParams, r: float, premium: PremiumSpec | None, payoff: PayoffSpec, T: float,
                    x_domain, y_domain, grid=(200, 100, 100)):
    """Factor drift ``y (eta + beta_vmvol theta_v - beta_vm theta_m)`` from estimated premia."""
    if premium is None:
        raise ModelError("sv_eq37 needs a PremiumSpec")
    c2x, c11, c2y = _sv_common(sv)

    def drift_y(x, y, t):
        return premium.y_drift_rate(t) * y

    return PdeProblem2D(r, drift_y, c2x, c2y, c11, r, payoff, x_domain, y_domain, tuple(grid), T, label="sv_eq37")


def sv_prop12_problem(sv: SvParams, r: float, payoff: PayoffSpec, T: float, x_domain, y_domain, grid=(200, 100, 100),
                      drift_y: Literal["rate", "literal"] = "rate"):
    """Complete market with the factor traded as a volatility index.

    ``drift_y="rate"`` uses the risk-neutral index drift ``r y``; ``"literal"``
    uses ``y`` exactly as displayed.
    """
    if drift_y not in ("rate", "literal"):
        raise ModelError(f"drift_y must be 'rate' or 'literal', got {drift_y!r}")
    c2x, c11, c2y = _sv_common(sv)
    k = r if drift_y == "rate" else 1.0

    def dy(x, y, t):
        return k * y

    return PdeProblem2D(r, dy, c2x, c2y, c11, r, payoff, x_domain, y_domain, tuple(grid), T, label="sv_prop12")
