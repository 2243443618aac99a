"""Self-exciting point processes with exponentially decaying intensity, by Ogata thinning."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..core import PATH_BLOCK, ModelError, PathSet, SeedSpec, TimeGrid, run_blocks


@dataclass(frozen=True)
class HawkesParams:
    """``d lam = alpha_l (lambda_inf - lam) dt + beta_l dN`` started at ``lambda_0``."""

    alpha_l: float
    lambda_inf: float
    beta_l: float
    lambda_0: float

    def __post_init__(self):
        if not self.alpha_l > 0:
            raise ModelError("alpha_l must be positive")
        if not self.lambda_inf > 0 or not self.lambda_0 > 0:
            raise ModelError("lambda_inf and lambda_0 must be positive")
        if self.beta_l < 0:
            raise ModelError("beta_l must be >= 0")

    @property
    def stationary(self) -> bool:
        return self.alpha_l > self.beta_l

    @property
    def stationary_mean(self) -> float:
        if not self.stationary:
            return float("inf")
        return self.alpha_l * self.lambda_inf / (self.alpha_l - self.beta_l)


def _hawkes_block(params: HawkesParams, gen: np.random.Generator, t_nodes: np.ndarray, m: int):
    """Thin one block of paths in lockstep: proposal ``j`` of path ``i`` uses draw ``[j, i]``."""
    a, li, b = params.alpha_l, params.lambda_inf, params.beta_l
    t0, T = t_nodes[0], t_nodes[-1]
    n1 = len(t_nodes)
    N = np.zeros((n1, m))
    lam_out = np.empty((n1, m))
    C = np.zeros((n1, m))
    lam_out[0] = params.lambda_0
    t = np.full(m, t0)
    lam = np.full(m, params.lambda_0)
    count = np.zeros(m)
    comp = np.zeros(m)
    nxt = np.ones(m, dtype=np.int64)  # next grid node to fill
    active = np.ones(m, dtype=bool)
    events = [[] for _ in range(m)]
    while active.any():
        u = gen.random((2, PATH_BLOCK))[:, :m]
        bound = np.maximum(lam, li)
        w = -np.log1p(-u[0]) / bound
        t_new = t + w
        end = np.minimum(t_new, T)

        # fill grid nodes inside (t, end] from the exact decay
        while True:
            idx = np.flatnonzero(active & (nxt < n1))
            if idx.size == 0:
                break
            tk = t_nodes[nxt[idx]]
            sel = tk <= end[idx]
            if not sel.any():
                break
            p = idx[sel]
            s = t_nodes[nxt[p]] - t[p]
            decay = np.exp(-a * s)
            lam_out[nxt[p], p] = li + (lam[p] - li) * decay
            N[nxt[p], p] = count[p]
            C[nxt[p], p] = comp[p] + li * s + (lam[p] - li) * (1.0 - decay) / a
            nxt[p] += 1

        s = end - t
        decay = np.exp(-a * s)
        comp = np.where(active, comp + li * s + (lam - li) * (1.0 - decay) / a, comp)
        lam_end = li + (lam - li) * decay
        accept = active & (t_new <= T) & (u[1] * bound <= lam_end)
        for i in np.flatnonzero(accept):
            events[i].append(t_new[i])
        count = count + accept
        lam = np.where(active, lam_end + b * accept, lam)
        t = np.where(active, end, t)
        active = active & (t_new < T)
    return N, lam_out, C, events


def simulate_hawkes(
    params: HawkesParams,
    grid: TimeGrid,
    n_paths: int,
    seed: SeedSpec,
    *,
    channel: str = "hawkes",
    keep_events: bool = False,
    n_workers: int = 1,
) -> PathSet:
    """Counts ``N``, intensity ``lambda`` and compensator ``C`` sampled on the grid.

    The intensity decays exactly between events; thinning uses the bound
    ``max(lambda_t, lambda_inf)``, valid because the intensity moves
    monotonically towards ``lambda_inf`` between events.  Non-stationary
    parameters (``beta_l >= alpha_l``) are allowed but warned about.
    """
    if not params.stationary:
        warnings.warn("Hawkes parameters are not stationary (beta_l >= alpha_l); intensity may explode",
                      RuntimeWarning, stacklevel=2)
    t_nodes = grid.nodes
    store = {}

    def block(b, m):
        N, lam, C, ev = _hawkes_block(params, seed.generator(channel, b), t_nodes, m)
        if keep_events:
            store[b] = ev
        return {"N": N.T, "lambda": lam.T, "C": C.T}

    ch = run_blocks(block, n_paths, n_workers)
    meta = {"model": "hawkes", "hawkes": params, "stationary": params.stationary}
    if keep_events:
        meta["events"] = [e for b in sorted(store) for e in store[b]]
    return PathSet(grid, ch, seed, meta)
