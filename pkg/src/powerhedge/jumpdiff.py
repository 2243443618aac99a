"""Merton jump-diffusion with a two-point jump law, the jump bond and the jump-free portfolio.

Jumps multiply the price by ``psi`` with probability ``p`` (else by 1) at the
arrivals of a Poisson process.  Arrivals are counted per time step and, inside a
step, placed after the diffusion move; the stock, the jump bond and every
derived quantity read the same arrival and mark channels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import PATH_BLOCK, Measure, ModelError, PathSet, SeedSpec, TimeGrid, record_index, run_blocks


@dataclass(frozen=True)
class JumpParams:
    alpha: float
    lam: float
    psi: float
    p: float = 1.0

    def __post_init__(self):
        if self.lam < 0:
            raise ModelError("jump intensity lambda must be >= 0")
        if not self.psi > 0:
            raise ModelError("jump multiplier psi must be positive")
        if not 0.0 < self.p <= 1.0:
            raise ModelError("jump probability p must lie in (0, 1]")

    @property
    def kappa(self) -> float:
        """Mean relative jump size ``E[y - 1] = (psi - 1) p``."""
        return (self.psi - 1.0) * self.p


@dataclass(frozen=True)
class JumpBondParams:
    m: float


def _jump_counts(seed: SeedSpec, b: int, m: int, n: int, lam_dt: float, p: float):
    """Per-step arrival counts and psi-mark counts, shape ``(n, m)``."""
    counts = seed.generator("dN", b).poisson(lam_dt, size=(n, PATH_BLOCK))
    if p >= 1.0:
        marks = counts
    else:
        marks = seed.generator("marks", b).binomial(counts, p)
    return counts[:, :m], marks[:, :m]


def simulate_merton(
    params: JumpParams,
    sigma: float,
    S0: float,
    grid: TimeGrid,
    n_paths: int,
    seed: SeedSpec,
    measure: Measure = "P",
    *,
    r: float = 0.0,
    record_every: int = 1,
    n_workers: int = 1,
) -> PathSet:
    """Paths of ``dS = (alpha - lam kappa) S dt + sigma S dB + (y - 1) S dN``.

    Under ``Q`` the drift ``alpha`` is replaced by ``r``.  Channels: ``S``,
    ``N`` (cumulative arrivals) and ``K`` (cumulative psi-marks).  The Brownian
    channel is shared with :func:`~powerhedge.core.simulate_gbm`, so ``lam = 0``
    reproduces GBM paths exactly.
    """
    if not S0 > 0:
        raise ModelError("S0 must be positive")
    if not sigma >= 0:
        raise ModelError("sigma must be >= 0")
    drift = {"P": params.alpha, "Q": r}.get(measure)
    if drift is None:
        raise ModelError(f"unknown measure {measure!r}")
    n, dt = grid.n_steps, grid.dt
    rec = record_index(grid, record_every)
    t_rec = grid.nodes[rec] - grid.t0
    log_psi = math.log(params.psi)
    mu_eff = drift - params.lam * params.kappa

    def block(b, m):
        z = seed.block_normals("dB", b, (n,), m)
        w = np.zeros((n + 1, m))
        np.cumsum(z, axis=0, out=w[1:])
        counts, marks = _jump_counts(seed, b, m, n, params.lam * dt, params.p)
        N = np.zeros((n + 1, m), dtype=np.int64)
        K = np.zeros((n + 1, m), dtype=np.int64)
        np.cumsum(counts, axis=0, out=N[1:])
        np.cumsum(marks, axis=0, out=K[1:])
        logs = (mu_eff - 0.5 * sigma * sigma) * t_rec[:, None] + sigma * math.sqrt(dt) * w[rec] + K[rec] * log_psi
        return {"S": (S0 * np.exp(logs)).T, "N": N[rec].T.astype(float), "K": K[rec].T.astype(float)}

    ch = run_blocks(block, n_paths, n_workers)
    meta = {"model": "merton", "measure": measure, "r": r, "psi": params.psi, "jump": params, "sigma": sigma}
    return PathSet(grid.coarsen(record_every), ch, seed, meta)


def jump_bond_path(bond: JumpBondParams, paths: PathSet, M0: float = 1.0, psi: float | None = None) -> np.ndarray:
    """``M_t = M0 e^{m t} psi^{K_t}`` using the arrival marks stored in ``paths``."""
    if "K" not in paths:
        raise ModelError("jump_bond_path needs a PathSet carrying the mark channel 'K'")
    psi = paths.meta.get("psi") if psi is None else psi
    if psi is None:
        raise ModelError("jump multiplier psi unknown: pass psi or use simulated jump paths")
    t = paths.times - paths.grid.t0
    return M0 * np.exp(bond.m * t)[None, :] * np.power(float(psi), paths["K"])


def jumpfree_portfolio_path(paths: PathSet, M: np.ndarray, psi: float | None = None):
    """Value of the portfolio long ``M_{t-}`` shares and short ``S_{t-}`` jump bonds.

    Returns ``(P, jumps)``: the self-financing value accumulated from
    ``dP = M_- dS - S_- dM`` with ``P_0 = 0``, and the change of ``P`` at the
    arrival instant of each step (zero by construction).
    """
    S = paths["S"]
    M = np.asarray(M, dtype=float)
    if M.shape != S.shape:
        raise ModelError(f"jump bond shape {M.shape} does not match stock paths {S.shape}")
    psi = paths.meta.get("psi") if psi is None else psi
    J = np.power(float(psi), np.diff(paths["K"], axis=1))
    S_pre = S[:, 1:] / J
    M_pre = M[:, 1:] / J
    cont = M[:, :-1] * (S_pre - S[:, :-1]) - S[:, :-1] * (M_pre - M[:, :-1])
    jumps = M_pre * S_pre * (J - 1.0) - S_pre * M_pre * (J - 1.0)
    P = np.zeros_like(S)
    np.cumsum(cont + jumps, axis=1, out=P[:, 1:])
    return P, jumps


# ---------------------------------------------------------------------------
# tradable power asset under jumps
# ---------------------------------------------------------------------------


def power_root_residual(rho, delta: float, psi: float):
    """``rho^2 - (psi^rho - 1)/(psi - 1) delta - rho + delta``; vanishes at ``rho = 1``."""
    rho = np.asarray(rho, dtype=float)
    return rho * rho - (np.power(psi, rho) - 1.0) / (psi - 1.0) * delta - rho + delta


def power_root_residual_literal(rho, delta: float, psi: float):
    """Variant with ``psi^(rho - 1)`` in place of ``psi^rho - 1``."""
    rho = np.asarray(rho, dtype=float)
    return rho * rho - np.power(psi, rho - 1.0) / (psi - 1.0) * delta - rho + delta


@dataclass(frozen=True)
class PowerExponentSolution:
    rho: float
    a: float
    residual: float
    variant: str = "lemma"


def solve_power_exponent(
    delta: float, psi: float, *, variant: str = "lemma", scan=(-50.0, 50.0), n_scan: int = 20001
) -> PowerExponentSolution:
    """Nontrivial root ``rho != 1`` of the tradability equation and its scale ``a``.

    Sign changes are bracketed on a uniform scan and refined with Brent's
    method.  When several roots exist the one closest to ``delta`` is returned:
    as ``psi -> 1`` the roots tend to ``{1, delta}``, so this is the branch that
    connects to the bondless diffusion asset.
    """
    if psi == 1.0 or not psi > 0:
        raise ModelError("solve_power_exponent needs psi > 0 and psi != 1")
    if delta == 0:
        raise ModelError("solve_power_exponent needs delta != 0")
    if variant == "lemma":
        f = power_root_residual
    elif variant == "eq22":
        f = power_root_residual_literal
    else:
        raise ModelError(f"unknown variant {variant!r}")
    grid = np.linspace(scan[0], scan[1], n_scan)
    with np.errstate(over="ignore", invalid="ignore"):
        vals = f(grid, delta, psi)
    roots = []
    for i in np.flatnonzero(np.isfinite(vals[:-1]) & np.isfinite(vals[1:]) & (np.sign(vals[:-1]) != np.sign(vals[1:]))):
        lo, hi = grid[i], grid[i + 1]
        if vals[i] == 0.0:
            root = lo
        else:
            root = brentq(lambda q: float(f(q, delta, psi)), lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        if abs(root - 1.0) > 1e-6:
            roots.append(root)
    if not roots:
        j = int(np.nanargmin(np.where(np.abs(grid - 1) > 1e-3, np.abs(vals), np.nan)))
        raise ModelError(
            f"no nontrivial root on [{scan[0]}, {scan[1]}] for delta={delta}, psi={psi}; "
            f"min |f| = {abs(vals[j]):.3g} at rho = {grid[j]:.4g}"
        )
    rho = min(roots, key=lambda q: abs(q - delta))
    if variant == "lemma":
        a = (psi**rho - 1.0) / (rho * (psi - 1.0))
    else:
        a = psi ** (rho - 1.0) / (rho * (psi - 1.0))
    return PowerExponentSolution(float(rho), float(a), float(f(rho, delta, psi)), variant)


# ---------------------------------------------------------------------------
# jump sizes driven by a second geometric process
# ---------------------------------------------------------------------------


def simulate_jumpz(
    params: JumpParams,
    sigma: float,
    a_z: float,
    b_z: float,
    S0: float,
    z0: float,
    grid: TimeGrid,
    n_paths: int,
    seed: SeedSpec,
    measure: Measure = "P",
    *,
    r: float = 0.0,
    corr: float = 1.0,
    record_every: int = 1,
    n_workers: int = 1,
) -> PathSet:
    """Stock whose relative jump at an arrival is ``z_{t-} (y - 1)``, with ``z`` a GBM.

    ``z`` is stepped exactly and shares the stock's Brownian increments
    (``corr = 1``); a smaller ``corr`` mixes in an independent channel.
    Channels: ``S``, ``z``, ``N``, ``K``.
    """
    if not S0 > 0 or z0 < 0:
        raise ModelError("simulate_jumpz needs S0 > 0 and z0 >= 0")
    if not -1.0 <= corr <= 1.0:
        raise ModelError("corr must lie in [-1, 1]")
    drift = {"P": params.alpha, "Q": r}.get(measure)
    if drift is None:
        raise ModelError(f"unknown measure {measure!r}")
    n, dt = grid.n_steps, grid.dt
    rec = record_index(grid, record_every)
    sq = math.sqrt(dt)
    mu_eff = drift - params.lam * params.kappa

    def block(b, m):
        z1 = seed.block_normals("dB", b, (n,), m)
        zz = z1 if corr == 1.0 else corr * z1 + math.sqrt(1.0 - corr * corr) * seed.block_normals("dW_z", b, (n,), m)
        counts, marks = _jump_counts(seed, b, m, n, params.lam * dt, params.p)
        logz = np.empty((n + 1, m))
        logz[0] = 0.0
        np.cumsum((a_z - 0.5 * b_z * b_z) * dt + b_z * sq * zz, axis=0, out=logz[1:])
        z = z0 * np.exp(logz)
        factor = 1.0 + z[:-1] * (params.psi - 1.0)
        if np.any((marks > 0) & (factor <= 0)):
            raise ModelError("jump factor 1 + z (psi - 1) became nonpositive; stock would leave (0, inf)")
        with np.errstate(divide="ignore", invalid="ignore"):
            jump_log = np.where(marks > 0, marks * np.log(np.where(factor > 0, factor, 1.0)), 0.0)
        logs = np.empty((n + 1, m))
        logs[0] = 0.0
        np.cumsum((mu_eff - 0.5 * sigma * sigma) * dt + sigma * sq * z1 + jump_log, axis=0, out=logs[1:])
        N = np.zeros((n + 1, m))
        K = np.zeros((n + 1, m))
        np.cumsum(counts, axis=0, out=N[1:])
        np.cumsum(marks, axis=0, out=K[1:])
        return {"S": (S0 * np.exp(logs[rec])).T, "z": z[rec].T, "N": N[rec].T, "K": K[rec].T}

    ch = run_blocks(block, n_paths, n_workers)
    meta = {"model": "jumpz", "measure": measure, "r": r, "psi": params.psi, "jump": params, "sigma": sigma,
            "a_z": a_z, "b_z": b_z}
    return PathSet(grid.coarsen(record_every), ch, seed, meta)
