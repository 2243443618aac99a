"""Command-line driver: ``price``, ``simulate``, ``hedge``, ``verify`` and ``diag``.

Each command reads a :class:`RunConfig`, runs the library and writes one CSV
table into the output directory.  Exit codes: 0 success, 2 configuration
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
import traceback
from pathlib import Path

import numpy as np

from ..basic_assets import PowerAsset, delta_exponent, gamma_exponent, martingale_statistic, one_step_discounted_expectation, power_asset_path
from ..core import MarketParams, ModelError, PayoffSpec, SeedSpec, TimeGrid, bsm_closed_form, simulate_gbm
from ..hedgesim import ClosedFormPricer, StrategySpec, SurfacePricer, backtest_hedge
from ..jumpdiff import JumpBondParams, JumpParams, jump_bond_path, jumpfree_portfolio_path, simulate_jumpz, simulate_merton
from ..lattice import crr_build, crr_price
from ..pde import (
    SolverConfig,
    bsm_problem,
    dividend_problem,
    fractional_problem,
    friction_problem,
    merton_problem,
    prop8_problem,
    prop10_problem,
    solve_pde_1d,
    solve_pde_2d,
    solve_pide_1d,
    sv_domains,
    sv_eq33_problem,
    sv_eq37_problem,
    sv_prop12_problem,
)
from ..sesv import (
    FbmParams,
    HawkesParams,
    JumpSizeLaw,
    SesvParams,
    fbm_generate,
    fgbm_path,
    fgn_autocovariance,
    lrd_diagnostics,
    sample_acf,
    simulate_hawkes,
    simulate_sesv,
)
from ..stochvol import PremiumSpec, SvParams, VovParams, mc_price, simulate_sv, simulate_vov
from .config import ConfigError, RunConfig, load_config, rebalance_counts
from .tables import ResultTable

COMMANDS = ("price", "simulate", "hedge", "verify", "diag")
OUTPUT_FILES = {"price": "price.csv", "simulate": "paths.csv", "hedge": "hedge.csv", "verify": "verify.csv",
                "diag": "lrd.csv"}


# ---------------------------------------------------------------------------
# building library objects from the config
# ---------------------------------------------------------------------------


class _Build:
    """Library objects for one config; parameter errors are reported as config errors."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.p = cfg.params
        self.num = cfg["numerics"]
        self.inst = cfg["instrument"]
        self.seed = SeedSpec(self.num["seed"])
        self.T = self.inst["maturity"]
        self.threads = self.num["threads"]
        with _as_config(cfg.model):
            K = self.inst["strike"]
            self.payoff = PayoffSpec.call(K) if self.inst["payoff"] == "call" else PayoffSpec.put(K)
            self.grid = TimeGrid(0.0, self.T, self.num["n_steps"])
            self.solver = SolverConfig(self.num["theta"], self.num["boundary"], self.num["rannacher_steps"],
                                       self.num["scheme"])
            getattr(self, f"_init_{cfg.model}")()

    def _init_gbm(self):
        p = self.p
        self.market = MarketParams(p["mu"], p["sigma"], p["r"])
        self.S0 = p["S0"]

    _init_fbm = _init_gbm

    def _init_merton(self):
        p = self.p
        self.jump = JumpParams(p["alpha"], p["lam"], p["psi"], p["p"])
        self.market = MarketParams(p["alpha"], p["sigma"], p["r"])
        self.S0 = p["S0"]

    _init_jumpz = _init_merton

    def _init_sv(self):
        p = self.p
        self.sv = SvParams(p["alpha"], p["m"], p["phi"], p["rho"], p["sigma_fn"], p["sigma_level"])
        self.S0, self.V0 = p["S0"], p["V0"]

    def _vov(self):
        p = self.p
        return VovParams(mu_fn=p["mu"], b_fn=p["b"], psi_fn=p["psi"], phi_fn=p["phi"], rho_V=p["rho_V"],
                         rho_v=p["rho_v"], varrho=p["varrho"], sigma_fn=p["sigma_fn"], sigma_level=p["sigma_level"],
                         ou_alpha=p["ou_alpha"], ou_m=p["ou_m"])

    def _init_vov(self):
        self.vov = self._vov()
        self.S0 = self.p["S0"]

    def _init_sesv(self):
        p = self.p

        def hawkes(tag):
            return HawkesParams(p[f"hawkes_{tag}_alpha"], p[f"hawkes_{tag}_lambda_inf"], p[f"hawkes_{tag}_beta"],
                                p[f"hawkes_{tag}_lambda_0"])

        def law(tag):
            return JumpSizeLaw(p[f"jump_{tag}_kind"], p[f"jump_{tag}_size"], p[f"jump_{tag}_p"], p[f"jump_{tag}_sd"])

        self.sesv = SesvParams(self._vov(), hawkes("S"), hawkes("V"), law("S"), law("V"))
        self.S0 = p["S0"]

    # -- pieces shared by several commands --

    def zetas(self) -> list[float]:
        out = []
        for item in self.inst["power_zeta"].split(","):
            item = item.strip()
            if item == "delta":
                out.append(delta_exponent(self.market))
            else:
                try:
                    out.append(float(item))
                except ValueError:
                    raise ConfigError(f"instrument.power_zeta: 'delta' or numbers, got {item!r}") from None
        return out

    def pde_grid(self):
        return (self.num["grid_x"], self.num["grid_t"])

    def paths(self, measure: str, n_paths: int | None = None, noise_only: bool = False):
        n_paths = self.num["n_paths"] if n_paths is None else n_paths
        kw = {"n_workers": self.threads}
        m, p, seed = self.cfg.model, self.p, self.seed
        rec = self.num["record_every"]
        if m == "gbm":
            ps = simulate_gbm(self.market, self.S0, self.grid, n_paths, seed, measure, record_every=rec, **kw)
            if self.inst["power_zeta"]:
                ps = power_asset_path(PowerAsset.for_market(self.zetas()[0], self.market), ps, self.market)
            return ps
        if m == "merton":
            ps = simulate_merton(self.jump, p["sigma"], self.S0, self.grid, n_paths, seed, measure, r=p["r"],
                                 record_every=rec, **kw)
            if self.inst["jump_bond_m"] is not None:
                ps = ps.with_channels(M=jump_bond_path(JumpBondParams(self.inst["jump_bond_m"]), ps))
            return ps
        if m == "jumpz":
            return simulate_jumpz(self.jump, p["sigma"], p["a_z"], p["b_z"], self.S0, p["z0"], self.grid, n_paths,
                                  seed, measure, r=p["r"], corr=p["corr"], record_every=rec, **kw)
        if m == "sv":
            return simulate_sv(self.sv, p["mu"], self.S0, self.V0, self.grid, n_paths, seed, measure, r=p["r"],
                               record_every=rec, **kw)
        if m == "vov":
            return simulate_vov(self.vov, self.S0, p["V0"], p["v0"], self.grid, n_paths, seed, measure, r=p["r"],
                                record_every=rec, **kw)
        if m == "sesv":
            if measure != "P":
                raise ConfigError("numerics.measure: the sesv model is simulated under P only")
            return simulate_sesv(self.sesv, self.S0, p["V0"], p["v0"], self.grid, n_paths, seed, **kw)
        fb = FbmParams(p["H"], p["n"], p["dt"])
        ps = fbm_generate(fb, n_paths, seed)
        if noise_only:
            return ps
        gbm = simulate_gbm(self.market, self.S0, ps.grid, n_paths, seed, measure, n_workers=self.threads)
        return ps.with_channels(D=fgbm_path(p["mu_H"], p["sigma_H"], p["D0"], ps), S=gbm["S"])

    def sv_problem(self):
        equation = self.inst["equation"]
        p = self.p
        xd, yd = sv_domains(self.sv, self.payoff, self.V0, self.T, p["r"], y_width=self.num["y_width"])
        grid = (self.num["grid_x"], self.num["grid_y"], self.num["grid_t"])
        if equation in ("auto", "prop12"):
            return sv_prop12_problem(self.sv, p["r"], self.payoff, self.T, xd, yd, grid, self.inst["sv_drift_y"])
        if equation == "eq33":
            return sv_eq33_problem(self.sv, p["mu"], p["r"], self.inst["premium_gamma"], self.payoff, self.T, xd, yd,
                                   grid)
        if equation == "eq37":
            i = self.inst
            prem = PremiumSpec(i["eta"], i["beta_v_mvol"], i["beta_v_m"], i["theta_m"], i["theta_v"])
            return sv_eq37_problem(self.sv, p["r"], prem, self.payoff, self.T, xd, yd, grid)
        raise ConfigError(f"instrument.equation: sv supports prop12|eq33|eq37, got {equation!r}")

    def prop10(self):
        p = self.p
        w = self.num["y_width"]
        zd = (p["z0"] * math.exp(-w), p["z0"] * math.exp(w))
        if not p["z0"] > 0:
            raise ConfigError("jumpz.z0: the z equation needs z0 > 0")
        return prop10_problem(self.jump, p["sigma"], p["r"], p["a_z"], p["b_z"], self.payoff, self.T, zd,
                              (self.num["grid_x"], self.num["grid_y"], self.num["grid_t"]),
                              width=self.num["width"], discount=self.inst["z_discount"])

    def one_d_problem(self):
        """1D pricing problem for the gbm/fbm/merton equations."""
        eq = self.inst["equation"]
        grid, width = self.pde_grid(), self.num["width"]
        m = self.cfg.model
        if m == "merton":
            p = self.p
            if eq in ("auto", "eq20"):
                return merton_problem(self.jump, p["sigma"], p["r"], self.payoff, self.T, grid, width=width + 1.0)
            if eq == "prop8":
                return prop8_problem(self.jump, p["sigma"], p["r"], self.payoff, self.T, grid, width=width + 1.0)
            raise ConfigError(f"instrument.equation: merton supports eq20|prop8, got {eq!r}")
        if m == "fbm" and eq == "auto":
            eq = "fractional"
        if eq in ("auto", "bsm"):
            return bsm_problem(self.market, self.payoff, self.T, grid, width=width)
        if eq == "dividend":
            return dividend_problem(self.market, self.payoff, self.T, self.inst["dividend_yield"], grid, width=width)
        if eq == "friction":
            return friction_problem(self.market, self.payoff, self.T, self.inst["friction_epsilon"],
                                    self.inst["friction_mode"], grid, width=width)
        if eq == "fractional":
            return fractional_problem(self.market, self.payoff, self.T, grid, width=width)
        raise ConfigError(f"instrument.equation: {m} supports bsm|dividend|friction|fractional, got {eq!r}")


class _as_config:
    """Context manager re-raising parameter validation errors as config errors."""

    def __init__(self, section: str):
        self.section = section

    def __enter__(self):
        return self

    def __exit__(self, typ, exc, tb):
        if typ is not None and issubclass(typ, ModelError):
            raise ConfigError(f"{self.section}: {exc}") from exc
        return False


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _surface_table(sol) -> ResultTable:
    t = sol.t
    pick = np.unique(np.round(np.linspace(0, len(t) - 1, 5)).astype(int))
    if sol.values.ndim == 2:
        table = ResultTable(["t", "x", "Y"])
        for k in pick:
            for x, y in zip(sol.x, sol.values[k]):
                table.add(float(t[k]), float(x), float(y))
        return table
    table = ResultTable(["t", "x", "y", "Y"])
    for k in pick:
        for i, x in enumerate(sol.x):
            for j, y in enumerate(sol.y):
                table.add(float(t[k]), float(x), float(y), float(sol.values[k, i, j]))
    return table


def cmd_price(b: _Build):
    m, method, num = b.cfg.model, b.num["method"], b.num
    nan = float("nan")
    table = ResultTable(["model", "method", "equation", "S0", "price", "stderr", "size"])
    extra = {}
    if m == "sesv":
        raise ConfigError("sesv: no pricing equation for this model; use simulate, verify or diag")
    defaults = {"gbm": "closed_form", "fbm": "pde", "merton": "pde", "jumpz": "pde", "sv": "pde", "vov": "mc"}
    method = defaults[m] if method == "auto" else method
    allowed = {"gbm": ("closed_form", "crr", "pde", "mc"), "fbm": ("closed_form", "pde"),
               "merton": ("pde", "mc"), "jumpz": ("pde", "mc"), "sv": ("pde", "mc"), "vov": ("mc",)}
    if method not in allowed[m]:
        raise ConfigError(f"numerics.method: {m} supports {'|'.join(allowed[m])}, got {method!r}")
    equation = b.inst["equation"]
    if method == "closed_form":
        price = float(bsm_closed_form(b.market, b.payoff, b.S0, b.T))
        table.add(m, method, "bsm", b.S0, price, nan, 0)
    elif method == "crr":
        with _as_config("numerics"):
            tree = crr_build(b.market, b.S0, b.T, num["n_steps"])
        price = crr_price(tree, b.payoff, num["crr_method"])
        table.add(m, method, num["crr_method"], b.S0, float(price), nan, num["n_steps"])
    elif method == "mc":
        ps = b.paths("Q")
        price, se = mc_price(ps, b.payoff, b.p["r"])
        table.add(m, method, "risk_neutral", b.S0, price, se, num["n_paths"])
    elif m in ("gbm", "fbm", "merton"):
        with _as_config("instrument"):
            prob = b.one_d_problem()
        sol = solve_pide_1d(prob, b.solver) if prob.jump_term is not None else solve_pde_1d(prob, b.solver)
        table.add(m, method, prob.label, b.S0, float(sol(b.S0)), nan, f"{num['grid_x']}x{num['grid_t']}")
        extra["surface"] = sol
    else:
        with _as_config("instrument"):
            prob = b.sv_problem() if m == "sv" else b.prop10()
        sol = solve_pde_2d(prob, b.solver)
        y0 = b.V0 if m == "sv" else b.p["z0"]
        size = f"{num['grid_x']}x{num['grid_y']}x{num['grid_t']}"
        table.add(m, method, prob.label, b.S0, float(sol(b.S0, y0)), nan, size)
        extra["surface"] = sol
    return table, extra


def cmd_simulate(b: _Build):
    ps = b.paths(b.num["measure"])
    names = list(ps.channels)
    limit = b.cfg["output"]["max_paths"] or ps.n_paths
    table = ResultTable(["t", "path_id", *names])
    t = ps.times
    for i in range(min(limit, ps.n_paths)):
        cols = [ps[c][i] for c in names]
        for k in range(t.size):
            table.add(float(t[k]), i, *(float(c[k]) for c in cols))
    return table, {}


HEDGE_KINDS = {
    "gbm": ("stock_bond", "stock_power", "stock_bond_power_friction"),
    "merton": ("stock_bond", "stock_power_jumpbond"),
    "jumpz": ("stock_power_jumpbond",),
    "sv": ("sv_stock_bond_volindex",),
}


def cmd_hedge(b: _Build):
    m, h = b.cfg.model, b.cfg["hedge"]
    kind = h["strategy"]
    if m not in HEDGE_KINDS:
        raise ConfigError(f"hedge: no hedging strategies for the {m} model")
    if kind not in HEDGE_KINDS[m]:
        raise ConfigError(f"hedge.strategy: {m} supports {'|'.join(HEDGE_KINDS[m])}, got {kind!r}")
    counts = rebalance_counts(b.cfg)
    if b.num["record_every"] != 1:
        raise ConfigError("numerics.record_every: hedging needs every step recorded")
    ip = {"r": b.p["r"]}
    if m == "gbm":
        ip["params"] = b.market
        if kind == "stock_bond_power_friction":
            ip.update(epsilon=h["epsilon"], mode=h["friction_mode"])
            with _as_config("hedge"):
                prob = friction_problem(b.market, b.payoff, b.T, h["epsilon"], h["friction_mode"], b.pde_grid(),
                                        width=b.num["width"])
            pricer = SurfacePricer(solve_pde_1d(prob, b.solver))
        else:
            pricer = ClosedFormPricer(b.market, b.payoff, b.T)
    elif m == "merton":
        ip["params"] = MarketParams(b.p["alpha"], b.p["sigma"], b.p["r"])
        if kind == "stock_power_jumpbond" and b.inst["equation"] == "auto":
            # a jump bond drifting at r leaves no jump risk to price: the value solves Black-Scholes
            prob = bsm_problem(ip["params"], b.payoff, b.T, b.pde_grid(), width=b.num["width"] + 1.0)
            pricer = SurfacePricer(solve_pde_1d(prob, b.solver))
        else:
            pricer = SurfacePricer(solve_pide_1d(b.one_d_problem(), b.solver))
    elif m == "jumpz":
        ip["params"] = MarketParams(b.p["alpha"], b.p["sigma"], b.p["r"])
        pricer = SurfacePricer(solve_pde_2d(b.prop10(), b.solver))
    else:
        pricer = SurfacePricer(solve_pde_2d(b.sv_problem(), b.solver))
    paths = b.paths("P")
    cols = ["strategy", "rebalance_every", "rebalances", "n_paths", "mean", "rms", "max_abs", "q05", "q50", "q95",
            "audit"]
    table = ResultTable(cols)
    errors = ResultTable(["rebalance_every", "path_id", "error"])
    for every in counts:
        with _as_config("hedge"):
            spec = StrategySpec(kind, every, ip)
        rep = backtest_hedge(spec, paths, b.payoff, pricer)
        s = rep.summary
        table.add(kind, every, rep.extra["rebalances"], s["n_paths"], s["mean"], s["rms"], s["max_abs"], s["q05"],
                  s["q50"], s["q95"], s["audit"])
        for i, e in enumerate(rep.errors):
            errors.add(every, i, float(e))
    return table, {"errors": errors}


def _mstat_row(table, check, parameter, paths, channel, r):
    mean, se, z = martingale_statistic(paths.with_channels(V=paths[channel]), r)
    table.add(check, parameter, mean, se, z, 0.0, int(abs(z) <= 3.0))


def cmd_verify(b: _Build):
    m, p = b.cfg.model, b.p
    table = ResultTable(["check", "parameter", "value", "stderr", "z", "reference", "pass"])
    nan = float("nan")
    if m == "gbm":
        zetas = b.zetas()
        dt = b.grid.dt
        for zeta in zetas:
            gam = 0.0 if zeta == delta_exponent(b.market) else gamma_exponent(zeta, b.market)
            e = one_step_discounted_expectation(zeta, gam, b.market, b.S0, 0.0, dt)
            resid = abs(e - b.S0**zeta) / max(1.0, b.S0**zeta)
            table.add("one_step_identity", zeta, resid, nan, nan, 0.0, int(resid <= 1e-12))
        ps = simulate_gbm(b.market, b.S0, b.grid, b.num["n_paths"], b.seed, "Q", n_workers=b.threads)
        for zeta in zetas:
            _mstat_row(table, "discounted_power_asset_Q", zeta, power_asset_path(PowerAsset.for_market(zeta, b.market), ps, b.market), "V", p["r"])
    elif m in ("merton", "jumpz"):
        P = b.paths("P")
        if m == "merton":
            mm = b.inst["jump_bond_m"] if b.inst["jump_bond_m"] is not None else p["r"]
            M = jump_bond_path(JumpBondParams(mm), P)
            _, jumps = jumpfree_portfolio_path(P, M)
            biggest = float(np.max(np.abs(jumps))) if jumps.size else 0.0
            table.add("jumpfree_portfolio_max_jump", mm, biggest, nan, nan, 0.0, int(biggest <= 1e-12))
        _mstat_row(table, "discounted_stock_Q", "S", b.paths("Q"), "S", p["r"])
    elif m in ("sv", "vov"):
        Q = b.paths("Q")
        for ch in ("S", "V", "v") if m == "vov" else ("S", "V"):
            _mstat_row(table, "discounted_level_Q", ch, Q, ch, p["r"])
    elif m == "sesv":
        P = b.paths("P")
        T = b.grid.T - b.grid.t0
        for tag in ("S", "V"):
            # N - C is a martingale; its mean should be zero
            hp = getattr(b.sesv, f"hawkes_{tag}")
            hw = simulate_hawkes(hp, b.grid, b.num["n_paths"], b.seed, channel=f"hawkes_{tag}", n_workers=b.threads)
            d = hw["N"][:, -1] - hw["C"][:, -1]
            se = float(d.std(ddof=1) / math.sqrt(d.size)) if d.size > 1 else nan
            z = float(d.mean() / se) if se and se > 0 else 0.0
            table.add(f"hawkes_{tag}_count_minus_compensator", T, float(d.mean()), se, z, 0.0, int(abs(z) <= 3.0))
            same = bool(np.array_equal(hw["N"], P[f"N_{tag}"]))
            table.add(f"hawkes_{tag}_channel_consistency", T, float(same), nan, nan, 1.0, int(same))
    else:
        fb = FbmParams(p["H"], p["n"], p["dt"])
        ps = fbm_generate(fb, b.num["n_paths"], b.seed)
        inc = ps["dBH"][:, :-1] / p["dt"] ** p["H"]
        acf1 = float(np.mean([sample_acf(row, 1)[1] for row in inc]))
        ref = float(fgn_autocovariance(p["H"], 1))
        tol = max(0.01, 4.0 / math.sqrt(inc.size))
        table.add("fgn_lag1_autocorrelation", p["H"], acf1, nan, nan, ref, int(abs(acf1 - ref) <= tol))
        if inc.shape[1] >= 256:
            rep = lrd_diagnostics(inc[0])
            table.add("hurst_estimate_path0", p["H"], rep.hurst_estimate, nan, nan, p["H"],
                      int(abs(rep.hurst_estimate - p["H"]) <= 0.07))
    return table, {}


def cmd_diag(b: _Build):
    d = b.cfg["diag"]
    col = d["column"]
    if d["input"]:
        try:
            src = ResultTable.read(d["input"])
        except (OSError, ValueError) as exc:
            raise ConfigError(f"diag.input: cannot read table: {exc}") from None
        if col not in src.columns:
            raise ConfigError(f"diag.column: {col!r} not in {d['input']} (columns: {', '.join(src.columns)})")
        values = src.column(col)
        if "path_id" in src.columns:
            ids = src.column("path_id")
            values = [v for v, i in zip(values, ids) if i == d["path_id"]]
        series = np.asarray(values, dtype=float)
        if col == "dBH" and series.size:
            series = series[:-1]
    else:
        ps = b.paths(b.num["measure"], n_paths=d["path_id"] + 1, noise_only=col in ("BH", "dBH"))
        if col not in ps:
            raise ConfigError(f"diag.column: channel {col!r} not simulated by {b.cfg.model} "
                              f"(channels: {', '.join(ps.channels)})")
        series = ps[col][d["path_id"]]
        if col == "dBH":
            series = series[:-1]
    if d["increments"]:
        series = np.diff(series)
    rep = lrd_diagnostics(series, d["max_lag"], d["n_sizes"])
    table = ResultTable(["quantity", "index", "value"])
    for lag, a in zip(rep.lags, rep.acf):
        table.add("acf", int(lag), float(a))
    for s, v in zip(rep.block_sizes, rep.block_variances):
        table.add("block_variance", int(s), float(v))
    table.add("variance_plot_slope", 0, rep.variance_plot_slope)
    table.add("hurst_estimate", 0, rep.hurst_estimate)
    table.add("n", 0, rep.n)
    return table, {}


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------


def _failing_module(exc: BaseException) -> str:
    for frame in reversed(traceback.extract_tb(exc.__traceback__)):
        parts = Path(frame.filename).parts
        if "powerhedge" in parts:
            rel = parts[parts.index("powerhedge") + 1:]
            if rel and rel[0] != "cli":
                return ".".join(Path(*rel).with_suffix("").parts)
    return "powerhedge"


def run(command: str, config_path, overrides=(), out_dir=".", seed: int | None = None, threads: int | None = None,
        stdout=None, stderr=None) -> int:
    """Run one command; returns the process exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        if command not in COMMANDS:
            raise ConfigError(f"unknown command {command!r}; choose one of {', '.join(COMMANDS)}")
        extra_over = list(overrides)
        if seed is not None:
            extra_over.append(f"numerics.seed={seed}")
        if threads is not None:
            extra_over.append(f"numerics.threads={threads}")
        cfg = load_config(config_path, extra_over)
        build = _Build(cfg)
        table, extra = globals()[f"cmd_{command}"](build)
        prec = cfg["output"]["precision"]
        out = Path(out_dir)
        written = [table.write(out / OUTPUT_FILES[command], prec)]
        if cfg["output"]["surface"] and "surface" in extra:
            written.append(_surface_table(extra["surface"]).write(out / "surface.csv", prec))
        if cfg["output"]["errors"] and "errors" in extra:
            written.append(extra["errors"].write(out / "hedge_errors.csv", prec))
        if command in ("price", "verify", "hedge"):
            stdout.write(table.to_csv(prec))
        for path in written:
            stdout.write(f"wrote {path}\n")
        return 0
    except ConfigError as exc:
        stderr.write(f"config error: {exc}\n")
        return 2
    except ModelError as exc:
        stderr.write(f"numerical failure in {_failing_module(exc)}: {exc}\n")
        return 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="powerhedge", description="Pricing, simulation and hedging runs from a config file.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="INI run configuration")
    ap.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                    help="override a config value as section.key=value (repeatable)")
    ap.add_argument("--out", default=".", help="output directory (default: current)")
    ap.add_argument("--seed", type=int, default=None, help="master seed (unsigned 64-bit), overrides numerics.seed")
    ap.add_argument("--threads", type=int, default=None, help="worker threads for path simulation")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.command, args.config, args.overrides, args.out, args.seed, args.threads)
