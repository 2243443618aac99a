"""Stochastic vol-of-vol dynamics with self-exciting additive jumps in the stock and the volatility."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import PATH_BLOCK, ModelError, PathSet, SeedSpec, TimeGrid, run_blocks
from ..stochvol import VovParams
from .hawkes import HawkesParams, _hawkes_block


@dataclass(frozen=True)
class JumpSizeLaw:
    """Mark law: ``two_point`` gives ``size`` w.p. ``p`` else 0; ``gaussian`` gives N(``size``, ``sd``**2)."""

    kind: str = "two_point"
    size: float = 0.0
    p: float = 1.0
    sd: float = 0.0

    def __post_init__(self):
        if self.kind not in ("two_point", "gaussian"):
            raise ModelError(f"unknown jump-size law {self.kind!r}")
        if not 0.0 <= self.p <= 1.0 or self.sd < 0:
            raise ModelError("jump-size law needs p in [0, 1] and sd >= 0")

    @property
    def mean(self) -> float:
        return self.size * self.p if self.kind == "two_point" else self.size

    def step_totals(self, counts: np.ndarray, gen: np.random.Generator, m: int) -> np.ndarray:
        """Sum of marks over ``counts`` arrivals per cell; draws a full block of each variate."""
        full = np.zeros(counts.shape[:-1] + (PATH_BLOCK,), dtype=np.int64)
        full[..., :m] = counts
        if self.kind == "two_point":
            hits = gen.binomial(full, self.p) if self.p < 1.0 else full
            return (self.size * hits)[..., :m]
        z = gen.standard_normal(full.shape)
        return (self.size * full + self.sd * np.sqrt(full) * z)[..., :m]


@dataclass(frozen=True)
class SesvParams:
    vov: VovParams
    hawkes_S: HawkesParams
    hawkes_V: HawkesParams
    jump_size_S: JumpSizeLaw = field(default_factory=JumpSizeLaw)
    jump_size_V: JumpSizeLaw = field(default_factory=JumpSizeLaw)


def simulate_sesv(
    params: SesvParams,
    S0: float,
    V0: float,
    v0: float,
    grid: TimeGrid,
    n_paths: int,
    seed: SeedSpec,
    *,
    n_workers: int = 1,
) -> PathSet:
    """Real-world paths; channels ``S, V, v, lambda_S, lambda_V, N_S, N_V, JS, JV``.

    The diffusive part follows :func:`~powerhedge.stochvol.simulate_vov` with
    the same noise channels, so switching all jumps off reproduces it.  Arrivals
    in a step add the summed marks after the diffusive move.  Each intensity is
    driven by its own arrivals.
    """
    if not S0 > 0:
        raise ModelError("S0 must be positive")
    vp = params.vov
    L = vp.correlation_factor()
    n, dt = grid.n_steps, grid.dt
    sq = math.sqrt(dt)
    t_nodes = grid.nodes
    mu_f, a_f, b_f, psi_f, phi_f = (vp.fn(k) for k in ("mu_fn", "alpha_fn", "b_fn", "psi_fn", "phi_fn"))

    def block(b, m):
        NS, lamS, _, _ = _hawkes_block(params.hawkes_S, seed.generator("hawkes_S", b), t_nodes, m)
        NV, lamV, _, _ = _hawkes_block(params.hawkes_V, seed.generator("hawkes_V", b), t_nodes, m)
        dNS = np.diff(NS, axis=0).astype(np.int64)
        dNV = np.diff(NV, axis=0).astype(np.int64)
        jS = params.jump_size_S.step_totals(dNS, seed.generator("marks_S", b), m)
        jV = params.jump_size_V.step_totals(dNV, seed.generator("marks_V", b), m)
        e = np.stack([seed.block_normals(ch, b, (n,), m) for ch in ("dB", "dBV", "dBv")])
        z = np.einsum("ij,jkm->ikm", L, e)
        S = np.empty((n + 1, m))
        V = np.empty((n + 1, m))
        v = np.empty((n + 1, m))
        S[0], V[0], v[0] = S0, V0, v0
        for k in range(n):
            t = t_nodes[k]
            sig = vp.sigma(V[k])
            mu = mu_f(S[k], V[k], v[k], t)
            S[k + 1] = S[k] * np.exp((mu - 0.5 * sig * sig) * dt + sig * sq * z[0, k]) + jS[k]
            V[k + 1] = V[k] + a_f(S[k], V[k], v[k], t) * dt + phi_f(v[k]) * sq * z[1, k] + jV[k]
            v[k + 1] = v[k] + b_f(S[k], V[k], v[k], t) * dt + psi_f(S[k], V[k], v[k], t) * sq * z[2, k]
        if np.any(S <= 0):
            raise ModelError("additive stock jumps drove S to a nonpositive value; reduce the jump size")
        JS = np.zeros((n + 1, m))
        JV = np.zeros((n + 1, m))
        np.cumsum(jS, axis=0, out=JS[1:])
        np.cumsum(jV, axis=0, out=JV[1:])
        return {"S": S.T, "V": V.T, "v": v.T, "lambda_S": lamS.T, "lambda_V": lamV.T,
                "N_S": NS.T, "N_V": NV.T, "JS": JS.T, "JV": JV.T}

    ch = run_blocks(block, n_paths, n_workers)
    return PathSet(grid, ch, seed, {"model": "sesv", "measure": "P", "sesv": params})


def jump_security_paths(channel: str, m: float, paths: PathSet, M0: float = 0.0) -> np.ndarray:
    """``M_t = M0 + m t + (sum of marks up to t)`` for the stock (``"S"``) or volatility (``"V"``) jumps."""
    key = {"S": "JS", "V": "JV"}.get(channel)
    if key is None:
        raise ModelError(f"jump channel must be 'S' or 'V', got {channel!r}")
    if key not in paths:
        raise ModelError(f"paths carry no {key!r} channel; simulate with simulate_sesv")
    t = paths.times - paths.grid.t0
    return M0 + m * t[None, :] + paths[key]
