"""Alternating-direction implicit solver for two-state-variable pricing equations.

The x axis is a uniform grid in ``ln x``; the y axis is uniform in ``y`` or in
``ln y``.  Each direction's operator carries half the discount and is solved
implicitly line by line; the mixed derivative and the shifted jump value are
explicit.  Douglas and Hundsdorfer-Verwer stepping are available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RectBivariateSpline

from ..core import ModelError
from .linalg import linear_extrapolation_weights, solve_tridiagonal
from .problem import PdeProblem2D, SolverConfig, evaluate
from .solver1d import _neighbour_values


@dataclass
class Solution2D:
    """``values[k, i, j] = Y(x[i], y[j], t[k])`` with ``t`` ascending."""

    x: np.ndarray
    y: np.ndarray
    t: np.ndarray
    values: np.ndarray
    problem: PdeProblem2D

    @property
    def _yc(self):
        return np.log(self.y) if self.problem.y_scale == "log" else self.y

    def _slice(self, t):
        if not self.t[0] - 1e-12 <= t <= self.t[-1] + 1e-12:
            raise ModelError(f"t={t} outside the solved interval [{self.t[0]}, {self.t[-1]}]")
        k = int(np.clip(np.searchsorted(self.t, t) - 1, 0, len(self.t) - 2))
        w = (t - self.t[k]) / (self.t[k + 1] - self.t[k])
        if abs(w) < 1e-9:
            return self.values[k]
        if abs(w - 1.0) < 1e-9:
            return self.values[k + 1]
        return (1.0 - w) * self.values[k] + w * self.values[k + 1]

    def _coords(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        tol = 1e-12
        bad_x = (x < self.x[0] * (1 - tol)) | (x > self.x[-1] * (1 + tol))
        bad_y = (y < self.y[0] - tol * abs(self.y[0])) | (y > self.y[-1] + tol * abs(self.y[-1]))
        if np.any(bad_x) or np.any(bad_y):
            raise ModelError(
                f"pricing surface covers x in [{self.x[0]:.6g}, {self.x[-1]:.6g}], y in "
                f"[{self.y[0]:.6g}, {self.y[-1]:.6g}]; {np.mean(bad_x | bad_y):.2%} of points fall outside"
            )
        yc = np.log(y) if self.problem.y_scale == "log" else y
        return np.log(x), yc

    def _spline(self, t):
        return RectBivariateSpline(np.log(self.x), self._yc, self._slice(t), kx=3, ky=3)

    def __call__(self, x, y, t: float = 0.0):
        zx, zy = self._coords(x, y)
        return self._spline(t).ev(zx, zy)

    def gradient(self, x, y, t: float = 0.0):
        """``(dY/dx, dY/dy)`` from central differences on the grid, bilinearly interpolated."""
        zx, zy = self._coords(x, y)
        v = self._slice(t)
        gz = np.gradient(v, np.log(self.x), axis=0)
        gy = np.gradient(v, self._yc, axis=1)
        sx = RectBivariateSpline(np.log(self.x), self._yc, gz, kx=1, ky=1).ev(zx, zy)
        sy = RectBivariateSpline(np.log(self.x), self._yc, gy, kx=1, ky=1).ev(zx, zy)
        x = np.exp(zx)
        if self.problem.y_scale == "log":
            sy = sy / np.exp(zy)
        return sx / x, sy


def solve_pde_2d(problem: PdeProblem2D, config: SolverConfig | None = None) -> Solution2D:
    config = config or SolverConfig()
    if config.boundary != "linearity":
        raise ModelError("the ADI solver supports only the linearity boundary")
    n_x, n_y, n_t = problem.grid
    zx = np.linspace(math.log(problem.x_domain[0]), math.log(problem.x_domain[1]), n_x + 1)
    x = np.exp(zx)
    log_y = problem.y_scale == "log"
    if log_y:
        zy = np.linspace(math.log(problem.y_domain[0]), math.log(problem.y_domain[1]), n_y + 1)
        y = np.exp(zy)
    else:
        zy = np.linspace(problem.y_domain[0], problem.y_domain[1], n_y + 1)
        y = zy
    hx, hy = zx[1] - zx[0], zy[1] - zy[0]
    Xi, Yi = np.meshgrid(x[1:-1], y[1:-1], indexing="ij")
    wx0, wx1 = linear_extrapolation_weights(x)
    wy0, wy1 = linear_extrapolation_weights(y)
    jump = problem.jump_term
    t_nodes = np.linspace(0.0, problem.maturity, n_t + 1)

    cache = {}

    def coefs(t):
        if t in cache:
            return cache[t]
        c1x = evaluate(problem.drift_x, Xi, Yi, t)
        c1y = evaluate(problem.drift_y, Xi, Yi, t)
        c2x = evaluate(problem.diffusion_x, Xi, Yi, t)
        c2y = evaluate(problem.diffusion_y, Xi, Yi, t)
        c11 = evaluate(problem.cross, Xi, Yi, t)
        c0 = evaluate(problem.discount, Xi, Yi, t)
        if np.any(c2x < 0) or np.any(c2y < 0) or np.any(c2x * c2y - c11**2 < -1e-12 * (1 + c2x * c2y)):
            raise ModelError("non-PSD diffusion: need c2x >= 0, c2y >= 0 and c2x*c2y >= c11^2")
        lam = 0.0
        if jump is not None:
            c1x = c1x + evaluate(jump.compensator, Xi, Yi, t)
            lam = evaluate(jump.intensity, Xi, Yi, t)
            c0 = c0 + lam * jump.p
        if log_y:
            c1y, c2y, c11 = c1y / Yi, c2y / Yi**2, c11 / Yi
        else:
            c1y = c1y + 0.5 * c2y  # cancels the -c2/2 below, so A = c1y
        Ax, Bx = c1x - 0.5 * c2x, 0.5 * c2x
        Ay, By = c1y - 0.5 * c2y, 0.5 * c2y
        opx = (-Ax / (2 * hx) + Bx / hx**2, -2 * Bx / hx**2 - 0.5 * c0, Ax / (2 * hx) + Bx / hx**2)
        opy = (-Ay / (2 * hy) + By / hy**2, -2 * By / hy**2 - 0.5 * c0, Ay / (2 * hy) + By / hy**2)
        out = (opx, opy, c11 / (4 * hx * hy), lam)
        cache.clear()
        cache[t] = out
        return out

    def extend(U):
        """Full grid from interior values using the linearity boundary in both axes."""
        F = np.empty((n_x + 1, n_y + 1))
        F[1:-1, 1:-1] = U
        F[0, 1:-1] = wx0[0] * U[0] + wx0[1] * U[1]
        F[-1, 1:-1] = wx1[0] * U[-1] + wx1[1] * U[-2]
        F[:, 0] = wy0[0] * F[:, 1] + wy0[1] * F[:, 2]
        F[:, -1] = wy1[0] * F[:, -2] + wy1[1] * F[:, -3]
        return F

    def apply_x(op, F):
        lo, di, up = op
        return lo * F[:-2, 1:-1] + di * F[1:-1, 1:-1] + up * F[2:, 1:-1]

    def apply_y(op, F):
        lo, di, up = op
        return lo * F[1:-1, :-2] + di * F[1:-1, 1:-1] + up * F[1:-1, 2:]

    def apply_0(cxy, lam, F):
        out = cxy * (F[2:, 2:] - F[2:, :-2] - F[:-2, 2:] + F[:-2, :-2])
        if jump is not None and jump.p and np.any(lam):
            shifted = np.stack([_neighbour_values(zx, x, F[:, j], math.log(jump.psi)) for j in range(1, n_y)], axis=1)
            out = out + lam * jump.p * shifted[1:-1]
        return out

    def solve_x(op, rhs, w):
        lo, di, up = op
        L, D, U = -w * lo, 1.0 - w * di, -w * up
        D, U, L = D.copy(), U.copy(), L.copy()
        D[0] += L[0] * wx0[0]
        U[0] += L[0] * wx0[1]
        D[-1] += U[-1] * wx1[0]
        L[-1] += U[-1] * wx1[1]
        return solve_tridiagonal(L, D, U, rhs)

    def solve_y(op, rhs, w):
        lo, di, up = (v.T for v in op)
        L, D, U = -w * lo, 1.0 - w * di, -w * up
        D, U, L = D.copy(), U.copy(), L.copy()
        D[0] += L[0] * wy0[0]
        U[0] += L[0] * wy0[1]
        D[-1] += U[-1] * wy1[0]
        L[-1] += U[-1] * wy1[1]
        return solve_tridiagonal(L, D, U, rhs.T).T

    def step(F, t_old, t_new, theta, scheme):
        k = t_old - t_new
        opx_o, opy_o, cxy_o, lam_o = coefs(t_old)
        a1 = apply_x(opx_o, F)
        a2 = apply_y(opy_o, F)
        U0 = F[1:-1, 1:-1] + k * (apply_0(cxy_o, lam_o, F) + a1 + a2)
        opx, opy, cxy, lam = coefs(t_new)
        U1 = solve_x(opx, U0 - theta * k * a1, theta * k)
        U2 = solve_y(opy, U1 - theta * k * a2, theta * k)
        if scheme == "douglas":
            return extend(U2)
        F2 = extend(U2)
        b1, b2 = apply_x(opx, F2), apply_y(opy, F2)
        f_new = apply_0(cxy, lam, F2) + b1 + b2
        f_old = apply_0(cxy_o, lam_o, F) + a1 + a2
        V0 = U0 + 0.5 * k * (f_new - f_old)
        V1 = solve_x(opx, V0 - theta * k * b1, theta * k)
        V2 = solve_y(opy, V1 - theta * k * b2, theta * k)
        return extend(V2)

    if config.scheme not in ("douglas", "hundsdorfer_verwer"):
        raise ModelError(f"unknown ADI scheme {config.scheme!r}")
    values = np.empty((n_t + 1, n_x + 1, n_y + 1))
    values[n_t] = np.broadcast_to(problem.terminal(x)[:, None], (n_x + 1, n_y + 1))
    F = values[n_t].copy()
    for n in range(n_t, 0, -1):
        t_old, t_new = t_nodes[n], t_nodes[n - 1]
        if n_t - n < config.rannacher_steps:
            t_mid = 0.5 * (t_old + t_new)
            half = step(step(F, t_old, t_mid, 1.0, "douglas"), t_mid, t_new, 1.0, "douglas")
            F = 2.0 * half - step(F, t_old, t_new, 1.0, "douglas")
        else:
            F = step(F, t_old, t_new, config.theta, config.scheme)
        values[n - 1] = F
    return Solution2D(x, y, t_nodes, values, problem)
