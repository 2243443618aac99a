"""Finite-difference solvers and the equation presets they are used with."""

from .adi import Solution2D, solve_pde_2d
from .presets import (
    bsm_problem,
    default_x_domain,
    dividend_problem,
    fractional_problem,
    fractional_problem_2d,
    friction_problem,
    merton_problem,
    prop8_coefficients,
    prop8_problem,
    prop10_problem,
    state_dependent_problem,
    sv_domains,
    sv_eq33_problem,
    sv_eq37_problem,
    sv_prop12_problem,
)
from .problem import JumpTerm, PdeProblem1D, PdeProblem2D, SolverConfig
from .solver1d import Solution1D, solve_pde_1d, solve_pide_1d

__all__ = [
    "JumpTerm", "PdeProblem1D", "PdeProblem2D", "SolverConfig", "Solution1D", "Solution2D",
    "solve_pde_1d", "solve_pide_1d", "solve_pde_2d",
    "bsm_problem", "default_x_domain", "dividend_problem", "fractional_problem", "fractional_problem_2d",
    "friction_problem", "merton_problem", "prop8_coefficients", "prop8_problem", "prop10_problem",
    "state_dependent_problem", "sv_domains", "sv_eq33_problem", "sv_eq37_problem", "sv_prop12_problem",
]
