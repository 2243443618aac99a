"""Equation descriptors and solver settings.

Every 1D equation is written in the normal form

    Y_t + c1(x,t) x Y_x - c0(x,t) Y + c2(x,t) x^2 Y_xx / 2 + jump = 0,
    jump = l(x,t) p (Y(psi x, t) - Y(x, t)) + k(x,t) x Y_x,

and every 2D equation in

    Y_t + c1x x Y_x + c1y Y_y + c2x x^2 Y_xx / 2 + c11 x Y_xy + c2y Y_yy / 2 - c0 Y [+ jump in x] = 0,

with coefficients given as constants or callables of ``(x, t)`` / ``(x, y, t)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Union

import numpy as np

from ..core import ModelError, PayoffSpec

Coef = Union[float, Callable]


def evaluate(coef: Coef, *args) -> np.ndarray:
    shape = np.broadcast_shapes(*(np.shape(a) for a in args[:-1]))
    val = coef(*args) if callable(coef) else coef
    return np.broadcast_to(np.asarray(val, dtype=float), shape)


@dataclass(frozen=True)
class JumpTerm:
    intensity: Coef
    psi: float
    p: float = 1.0
    compensator: Coef = 0.0

    def __post_init__(self):
        if not self.psi > 0:
            raise ModelError("jump multiplier psi must be positive")
        if not 0.0 <= self.p <= 1.0:
            raise ModelError("jump probability p must lie in [0, 1]")


def _check_strike_inside(payoff: PayoffSpec, x_domain) -> None:
    K = getattr(payoff, "strike", None)
    if K is not None and not x_domain[0] < K < x_domain[1]:
        raise ModelError(f"payoff strike {K} lies outside x_domain {tuple(x_domain)}")


@dataclass(frozen=True)
class PdeProblem1D:
    drift: Coef
    discount: Coef
    diffusion: Coef
    terminal: PayoffSpec
    x_domain: tuple[float, float]
    grid: tuple[int, int]
    maturity: float
    jump_term: JumpTerm | None = None
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x_min, x_max = self.x_domain
        if not 0 < x_min < x_max:
            raise ModelError(f"x_domain must satisfy 0 < x_min < x_max, got {self.x_domain}")
        if min(self.grid) < 3:
            raise ModelError(f"grid sizes must be >= 3, got {self.grid}")
        _check_strike_inside(self.terminal, self.x_domain)
        if not self.maturity > 0:
            raise ModelError("maturity must be positive")


@dataclass(frozen=True)
class PdeProblem2D:
    drift_x: Coef
    drift_y: Coef
    diffusion_x: Coef
    diffusion_y: Coef
    cross: Coef
    discount: Coef
    terminal: PayoffSpec
    x_domain: tuple[float, float]
    y_domain: tuple[float, float]
    grid: tuple[int, int, int]
    maturity: float
    y_scale: Literal["linear", "log"] = "linear"
    jump_term: JumpTerm | None = None
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x_min, x_max = self.x_domain
        if not 0 < x_min < x_max:
            raise ModelError(f"x_domain must satisfy 0 < x_min < x_max, got {self.x_domain}")
        y_min, y_max = self.y_domain
        if not y_min < y_max or (self.y_scale == "log" and y_min <= 0):
            raise ModelError(f"invalid y_domain {self.y_domain} for {self.y_scale} scale")
        if min(self.grid) < 3:
            raise ModelError(f"grid sizes must be >= 3, got {self.grid}")
        _check_strike_inside(self.terminal, self.x_domain)
        if not self.maturity > 0:
            raise ModelError("maturity must be positive")


@dataclass(frozen=True)
class SolverConfig:
    theta: float = 0.5
    boundary: Literal["linearity", "dirichlet_payoff_asymptote"] = "linearity"
    rannacher_steps: int = 2
    scheme: Literal["douglas", "hundsdorfer_verwer"] = "douglas"

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ModelError("theta must lie in [0, 1]")
        if self.boundary not in ("linearity", "dirichlet_payoff_asymptote"):
            raise ModelError(f"unknown boundary condition {self.boundary!r}")
        if self.rannacher_steps < 0:
            raise ModelError("rannacher_steps must be >= 0")
