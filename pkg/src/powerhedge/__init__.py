"""Pricing and hedging with perpetual power assets, jump bonds and volatility instruments."""

from .basic_assets import PowerAsset, basic_asset, delta_exponent, gamma_exponent, martingale_statistic, power_asset_path
from .core import (
    MarketParams,
    ModelError,
    PathSet,
    PayoffSpec,
    SeedSpec,
    TimeGrid,
    bond_path,
    bsm_closed_form,
    bsm_delta,
    simulate_gbm,
)
from .hedgesim import HedgeReport, StrategySpec, backtest_hedge
from .lattice import crr_build, crr_price

__version__ = "0.1.0"

__all__ = [
    "MarketParams", "ModelError", "PathSet", "PayoffSpec", "SeedSpec", "TimeGrid",
    "bond_path", "bsm_closed_form", "bsm_delta", "simulate_gbm",
    "PowerAsset", "basic_asset", "delta_exponent", "gamma_exponent", "martingale_statistic", "power_asset_path",
    "crr_build", "crr_price", "HedgeReport", "StrategySpec", "backtest_hedge",
]
