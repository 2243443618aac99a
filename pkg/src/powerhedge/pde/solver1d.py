"""Theta-scheme solver on a uniform log-price grid, with an IMEX jump term.

Local terms (drift, discount, diffusion, the jump compensator and the
``-l p Y`` part of the jump) are treated by the theta scheme; only the shifted
value ``l p Y(psi x)`` is explicit, extrapolated Adams-Bashforth style so that
Crank-Nicolson steps stay second order.  The first ``rannacher_steps`` steps
are fully implicit to damp payoff kinks, extrapolated from one full and two
half steps so that they do not cost an order of accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from ..core import ModelError
from .linalg import apply_tridiagonal, linear_extrapolation_weights, solve_tridiagonal
from .problem import PdeProblem1D, SolverConfig, evaluate


@dataclass
class Solution1D:
    """Value surface ``values[k, j] = Y(x[j], t[k])`` with ``t`` ascending."""

    x: np.ndarray
    t: np.ndarray
    values: np.ndarray
    problem: PdeProblem1D

    @property
    def z(self) -> np.ndarray:
        return np.log(self.x)

    def _slice(self, t: float) -> np.ndarray:
        if not self.t[0] - 1e-12 <= t <= self.t[-1] + 1e-12:
            raise ModelError(f"t={t} outside the solved interval [{self.t[0]}, {self.t[-1]}]")
        k = int(np.clip(np.searchsorted(self.t, t) - 1, 0, len(self.t) - 2))
        w = (t - self.t[k]) / (self.t[k + 1] - self.t[k])
        if abs(w) < 1e-9:
            return self.values[k]
        if abs(w - 1.0) < 1e-9:
            return self.values[k + 1]
        return (1.0 - w) * self.values[k] + w * self.values[k + 1]

    def _check_cover(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.x[0] * (1 - 1e-12)) or np.any(x > self.x[-1] * (1 + 1e-12)):
            inside = np.mean((x >= self.x[0]) & (x <= self.x[-1]))
            raise ModelError(
                f"pricing surface covers [{self.x[0]:.6g}, {self.x[-1]:.6g}] but points span "
                f"[{x.min():.6g}, {x.max():.6g}] (coverage {inside:.2%})"
            )
        return x

    def __call__(self, x, t: float = 0.0):
        x = self._check_cover(x)
        return CubicSpline(self.z, self._slice(t))(np.log(x))

    def delta(self, x, t: float = 0.0):
        """``dY/dx`` from central differences in log-space, interpolated linearly."""
        x = self._check_cover(x)
        y = self._slice(t)
        dydz = np.gradient(y, self.z)
        return np.interp(np.log(x), self.z, dydz) / x


def _neighbour_values(z: np.ndarray, x: np.ndarray, y: np.ndarray, shift: float) -> np.ndarray:
    """``Y(psi x)`` on the grid: monotone cubic in log-price, linear-in-x extension outside."""
    zq = z + shift
    out = PchipInterpolator(z, y, extrapolate=False)(zq)
    xq = np.exp(zq)
    lo, hi = zq < z[0], zq > z[-1]
    if lo.any():
        out[lo] = y[0] + (xq[lo] - x[0]) * (y[1] - y[0]) / (x[1] - x[0])
    if hi.any():
        out[hi] = y[-1] + (xq[hi] - x[-1]) * (y[-1] - y[-2]) / (x[-1] - x[-2])
    return out


def solve_pde_1d(problem: PdeProblem1D, config: SolverConfig | None = None) -> Solution1D:
    config = config or SolverConfig()
    n_x, n_t = problem.grid
    x_min, x_max = problem.x_domain
    z = np.linspace(math.log(x_min), math.log(x_max), n_x + 1)
    z[0], z[-1] = math.log(x_min), math.log(x_max)
    x = np.exp(z)
    h = z[1] - z[0]
    T = problem.maturity
    t_nodes = np.linspace(0.0, T, n_t + 1)
    xi = x[1:-1]
    jump = problem.jump_term
    w0, w1 = linear_extrapolation_weights(x)

    def local(t):
        c1 = evaluate(problem.drift, xi, t).copy()
        c0 = evaluate(problem.discount, xi, t).copy()
        c2 = evaluate(problem.diffusion, xi, t)
        if np.any(c2 < 0):
            raise ModelError("non-PSD diffusion: c2 < 0 somewhere on the domain")
        if jump is not None:
            c1 = c1 + evaluate(jump.compensator, xi, t)
            c0 = c0 + evaluate(jump.intensity, xi, t) * jump.p
        A = c1 - 0.5 * c2
        B = 0.5 * c2
        return -A / (2 * h) + B / h**2, -2 * B / h**2 - c0, A / (2 * h) + B / h**2

    def explicit_jump(y, t):
        if jump is None or jump.p == 0:
            return 0.0
        lam = evaluate(jump.intensity, xi, t)
        if not np.any(lam):
            return 0.0
        return lam * jump.p * _neighbour_values(z, x, y, math.log(jump.psi))[1:-1]

    dirichlet = config.boundary == "dirichlet_payoff_asymptote"
    # running integrals of c1, c0 at the two boundary nodes, for the asymptote
    xb = np.array([x[0], x[-1]])
    integ = {"c1": np.zeros(2), "c0": np.zeros(2), "tau": 0.0}

    def boundary_values(t_new, t_old):
        dtau = t_old - t_new
        for key, coef in (("c1", problem.drift), ("c0", problem.discount)):
            integ[key] += 0.5 * dtau * (evaluate(coef, xb, t_new) + evaluate(coef, xb, t_old))
        return problem.terminal(xb * np.exp(integ["c1"])) * np.exp(-integ["c0"])

    def step(y, t_old, t_new, theta, jexp):
        k = t_old - t_new
        lo_o, di_o, up_o = local(t_old)
        rhs = y[1:-1] + (1 - theta) * k * apply_tridiagonal(lo_o, di_o, up_o, y) + k * jexp
        lo, di, up = local(t_new)
        L, D, U = -theta * k * lo, 1.0 - theta * k * di, -theta * k * up
        D, U, L = D.copy(), U.copy(), L.copy()
        if dirichlet:
            g = boundary_values(t_new, t_old)
            rhs[0] -= L[0] * g[0]
            rhs[-1] -= U[-1] * g[1]
        else:
            D[0] += L[0] * w0[0]
            U[0] += L[0] * w0[1]
            D[-1] += U[-1] * w1[0]
            L[-1] += U[-1] * w1[1]
        yi = solve_tridiagonal(L, D, U, rhs)
        out = np.empty_like(y)
        out[1:-1] = yi
        if dirichlet:
            out[0], out[-1] = g
        else:
            out[0] = w0[0] * yi[0] + w0[1] * yi[1]
            out[-1] = w1[0] * yi[-1] + w1[1] * yi[-2]
        return out

    values = np.empty((n_t + 1, n_x + 1))
    y = problem.terminal(x).astype(float)
    values[n_t] = y
    prev = None  # (Y, t) at the previous full level, for jump extrapolation
    theta = config.theta
    for n in range(n_t, 0, -1):
        t_old, t_new = t_nodes[n], t_nodes[n - 1]
        if n_t - n < config.rannacher_steps:
            t_mid = 0.5 * (t_old + t_new)
            half = step(y, t_old, t_mid, 1.0, explicit_jump(y, t_old))
            half = step(half, t_mid, t_new, 1.0, explicit_jump(half, t_mid))
            full = step(y, t_old, t_new, 1.0, explicit_jump(y, t_old))
            y_next = 2.0 * half - full
        else:
            e_now = explicit_jump(y, t_old)
            if prev is None or theta == 0.0:
                jexp = e_now
            else:
                jexp = (1 + theta) * e_now - theta * explicit_jump(*prev)
            y_next = step(y, t_old, t_new, theta, jexp)
        prev = (y, t_old)
        y = y_next
        values[n - 1] = y
    return Solution1D(x, t_nodes, values, problem)


def solve_pide_1d(problem: PdeProblem1D, config: SolverConfig | None = None) -> Solution1D:
    """Same kernel as :func:`solve_pde_1d`; insists that the problem carries a jump term."""
    if problem.jump_term is None:
        raise ModelError("solve_pide_1d needs a problem with a jump_term")
    return solve_pde_1d(problem, config)
