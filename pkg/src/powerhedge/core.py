"""Shared market types, time grids, the seeded RNG contract and the GBM/BSM basics.

Random numbers are drawn from counter-based Philox streams keyed by
``(master_seed, channel, block)``.  Paths are grouped into fixed blocks of
:data:`PATH_BLOCK` paths and every block always draws a full block's worth of
numbers, so the numbers seen by path ``i`` depend only on the seed, the channel
label and ``i`` -- never on ``n_paths``, on which other paths exist, or on how
many worker threads run the blocks.
"""

from __future__ import annotations

import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Literal, Mapping

import numpy as np
from scipy.special import ndtr

PATH_BLOCK = 4096

Measure = Literal["P", "Q"]


class ModelError(ValueError):
    """Raised when inputs violate a model or numerical precondition."""


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MarketParams:
    """Drift ``mu``, volatility ``sigma`` and riskless rate ``r`` (all annualised)."""

    mu: float
    sigma: float
    r: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ModelError(f"sigma must be positive, got {self.sigma}")
        if self.r < 0:
            raise ModelError(f"r must be non-negative, got {self.r}")

    def drift(self, measure: Measure) -> float:
        if measure == "P":
            return self.mu
        if measure == "Q":
            return self.r
        raise ModelError(f"unknown measure {measure!r}")


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    T: float
    n_steps: int

    def __post_init__(self):
        if not self.T > self.t0:
            raise ModelError(f"TimeGrid needs T > t0, got t0={self.t0}, T={self.T}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ModelError(f"n_steps must be a positive integer, got {self.n_steps}")

    @property
    def dt(self) -> float:
        return (self.T - self.t0) / self.n_steps

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.t0, self.T, self.n_steps + 1)

    def coarsen(self, every: int) -> "TimeGrid":
        if every < 1 or self.n_steps % every:
            raise ModelError(f"record_every={every} must divide n_steps={self.n_steps}")
        return TimeGrid(self.t0, self.T, self.n_steps // every)


@dataclass(frozen=True)
class PayoffSpec:
    """European payoff: ``call``/``put`` with a strike, or a tabulated ``custom`` g(x)."""

    kind: Literal["call", "put", "custom"]
    strike: float | None = None
    table_x: tuple[float, ...] | None = None
    table_y: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind in ("call", "put"):
            if self.strike is None or not self.strike > 0:
                raise ModelError(f"{self.kind} payoff needs a positive strike")
        elif self.kind == "custom":
            if self.table_x is None or self.table_y is None:
                raise ModelError("custom payoff needs table_x and table_y")
            x = np.asarray(self.table_x, dtype=float)
            if len(x) < 2 or len(x) != len(self.table_y) or np.any(np.diff(x) <= 0):
                raise ModelError("custom payoff table needs >= 2 strictly increasing abscissae")
        else:
            raise ModelError(f"unknown payoff kind {self.kind!r}")

    @classmethod
    def call(cls, strike: float) -> "PayoffSpec":
        return cls("call", float(strike))

    @classmethod
    def put(cls, strike: float) -> "PayoffSpec":
        return cls("put", float(strike))

    @classmethod
    def custom(cls, x, y) -> "PayoffSpec":
        return cls("custom", None, tuple(map(float, x)), tuple(map(float, y)))

    @classmethod
    def constant(cls, c: float) -> "PayoffSpec":
        return cls.custom([0.0, 1.0], [c, c])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "call":
            return np.maximum(x - self.strike, 0.0)
        if self.kind == "put":
            return np.maximum(self.strike - x, 0.0)
        tx = np.asarray(self.table_x)
        ty = np.asarray(self.table_y)
        # linear extension beyond the table ends
        out = np.interp(x, tx, ty)
        lo, hi = x < tx[0], x > tx[-1]
        out = np.where(lo, ty[0] + (x - tx[0]) * (ty[1] - ty[0]) / (tx[1] - tx[0]), out)
        out = np.where(hi, ty[-1] + (x - tx[-1]) * (ty[-1] - ty[-2]) / (tx[-1] - tx[-2]), out)
        return out


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ModelError("master_seed must fit in an unsigned 64-bit integer")

    def generator(self, channel: str, block: int) -> np.random.Generator:
        """Philox stream for one (channel, path-block) pair."""
        ss = np.random.SeedSequence(int(self.master_seed), spawn_key=(channel_id(channel), int(block)))
        return np.random.Generator(np.random.Philox(ss))

    def block_normals(self, channel: str, block: int, shape_lead: tuple[int, ...], m: int) -> np.ndarray:
        """Standard normals of shape ``shape_lead + (m,)`` for the first ``m`` paths of a block."""
        z = self.generator(channel, block).standard_normal(shape_lead + (PATH_BLOCK,))
        return z[..., :m]


def channel_id(channel: str) -> int:
    return zlib.crc32(channel.encode("utf-8"))


@dataclass
class PathSet:
    """Simulated trajectories sharing one recorded time grid.

    Each channel is an array of shape ``(n_paths, grid.n_steps + 1)``.
    """

    grid: TimeGrid
    channels: dict[str, np.ndarray]
    seed: SeedSpec | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, arr in self.channels.items():
            if arr.ndim != 2 or arr.shape[1] != self.grid.n_steps + 1:
                raise ModelError(f"channel {name!r} has shape {arr.shape}, grid has {self.grid.n_steps + 1} nodes")
        sizes = {arr.shape[0] for arr in self.channels.values()}
        if len(sizes) > 1:
            raise ModelError(f"channels disagree on path count: {sorted(sizes)}")

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.channels[name]
        except KeyError:
            raise ModelError(f"PathSet has no channel {name!r}; available: {sorted(self.channels)}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.channels

    @property
    def n_paths(self) -> int:
        return next(iter(self.channels.values())).shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.grid.nodes

    def with_channels(self, **extra: np.ndarray) -> "PathSet":
        return PathSet(self.grid, {**self.channels, **extra}, self.seed, dict(self.meta))


# ---------------------------------------------------------------------------
# block-parallel simulation driver
# ---------------------------------------------------------------------------


def run_blocks(
    block_fn: Callable[[int, int], Mapping[str, np.ndarray]],
    n_paths: int,
    n_workers: int = 1,
) -> dict[str, np.ndarray]:
    """Evaluate ``block_fn(block_index, m)`` over all path blocks and stack the results.

    Output order is fixed by block index, so the result does not depend on
    ``n_workers``.
    """
    if int(n_paths) != n_paths or n_paths < 1:
        raise ModelError(f"n_paths must be a positive integer, got {n_paths}")
    n_blocks = -(-n_paths // PATH_BLOCK)
    sizes = [min(PATH_BLOCK, n_paths - b * PATH_BLOCK) for b in range(n_blocks)]
    if n_workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(block_fn, range(n_blocks), sizes))
    else:
        parts = [block_fn(b, m) for b, m in zip(range(n_blocks), sizes)]
    return {k: np.concatenate([p[k] for p in parts], axis=0) for k in parts[0]}


def record_index(grid: TimeGrid, record_every: int) -> np.ndarray:
    grid.coarsen(record_every)
    return np.arange(0, grid.n_steps + 1, record_every)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def bsm_closed_form(params: MarketParams, payoff: PayoffSpec, S0, T, t: float = 0.0):
    """Black-Scholes value of a call or put at time ``t`` (vectorised in ``S0``)."""
    if payoff.kind not in ("call", "put"):
        raise ModelError("closed form is only defined for call/put payoffs")
    S0 = np.asarray(S0, dtype=float)
    tau = T - t
    if np.any(S0 <= 0) or not tau > 0:
        raise ModelError("bsm_closed_form needs S0 > 0 and T > t")
    K, r, sig = payoff.strike, params.r, params.sigma
    sd = sig * math.sqrt(tau)
    d1 = (np.log(S0 / K) + (r + 0.5 * sig * sig) * tau) / sd
    d2 = d1 - sd
    disc = math.exp(-r * tau)
    call = S0 * ndtr(d1) - K * disc * ndtr(d2)
    if payoff.kind == "call":
        out = call
    else:
        out = call - S0 + K * disc
    return out[()] if out.ndim == 0 else out


def bsm_delta(params: MarketParams, payoff: PayoffSpec, S, T, t=0.0):
    if payoff.kind not in ("call", "put"):
        raise ModelError("closed form is only defined for call/put payoffs")
    S = np.asarray(S, dtype=float)
    tau = np.asarray(T - t, dtype=float)
    sd = params.sigma * np.sqrt(tau)
    d1 = (np.log(S / payoff.strike) + (params.r + 0.5 * params.sigma**2) * tau) / sd
    d = ndtr(d1)
    return d if payoff.kind == "call" else d - 1.0


def simulate_gbm(
    params: MarketParams,
    S0: float,
    grid: TimeGrid,
    n_paths: int,
    seed: SeedSpec,
    measure: Measure = "P",
    *,
    record_every: int = 1,
    n_workers: int = 1,
) -> PathSet:
    """Exact lognormal stepping of ``dS = drift S dt + sigma S dB``."""
    if not S0 > 0:
        raise ModelError("S0 must be positive")
    drift = params.drift(measure)
    sig, dt, n = params.sigma, grid.dt, grid.n_steps
    rec = record_index(grid, record_every)
    t_rec = grid.nodes[rec] - grid.t0

    def block(b, m):
        z = seed.block_normals("dB", b, (n,), m)
        w = np.zeros((n + 1, m))
        np.cumsum(z, axis=0, out=w[1:])
        logs = (drift - 0.5 * sig * sig) * t_rec[:, None] + sig * math.sqrt(dt) * w[rec]
        return {"S": (S0 * np.exp(logs)).T}

    ch = run_blocks(block, n_paths, n_workers)
    return PathSet(grid.coarsen(record_every), ch, seed, {"model": "gbm", "measure": measure, "r": params.r})


def bond_path(r: float, grid: TimeGrid | np.ndarray) -> np.ndarray:
    t = grid.nodes if isinstance(grid, TimeGrid) else np.asarray(grid, dtype=float)
    return np.exp(r * t)
