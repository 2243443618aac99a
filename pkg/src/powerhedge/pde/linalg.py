"""Batched tridiagonal algebra shared by the 1D and ADI solvers."""

from __future__ import annotations

import numpy as np


def solve_tridiagonal(lower, diag, upper, rhs):
    """Thomas algorithm along axis 0, batched over any trailing axes.

    ``lower[0]`` and ``upper[-1]`` are ignored.  No pivoting: callers supply
    diagonally dominant systems (implicit diffusion steps).
    """
    lower = np.asarray(lower, dtype=float)
    diag = np.asarray(diag, dtype=float)
    upper = np.asarray(upper, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.shape[0]
    shape = np.broadcast_shapes(lower.shape, diag.shape, upper.shape, rhs.shape)
    lower, diag, upper = (np.broadcast_to(v, shape) for v in (lower, diag, upper))
    c = np.empty(shape)
    d = np.empty(shape)
    c[0] = upper[0] / diag[0]
    d[0] = rhs[0] / diag[0]
    for i in range(1, n):
        m = diag[i] - lower[i] * c[i - 1]
        c[i] = upper[i] / m
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m
    x = np.empty(shape)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def apply_tridiagonal(lower, diag, upper, u):
    """Interior result of ``lower*u[i-1] + diag*u[i] + upper*u[i+1]`` along axis 0.

    ``u`` includes the two boundary rows; the result has ``len(u) - 2`` rows.
    """
    return lower * u[:-2] + diag * u[1:-1] + upper * u[2:]


def linear_extrapolation_weights(x: np.ndarray):
    """Weights so that ``u[0] = w0[0] u[1] + w0[1] u[2]`` and ``u[-1] = w1[0] u[-2] + w1[1] u[-3]``
    make ``u`` linear in ``x`` at each end."""
    x0, x1, x2 = x[0], x[1], x[2]
    w0 = ((x2 - x0) / (x2 - x1), (x0 - x1) / (x2 - x1))
    xn, xn1, xn2 = x[-1], x[-2], x[-3]
    w1 = ((xn - xn2) / (xn1 - xn2), (xn1 - xn) / (xn1 - xn2))
    return w0, w1
