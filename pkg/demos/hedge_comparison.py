"""Hedging error of a call under three replicating portfolios.

Stock and bond is the textbook delta hedge.  Stock and bond-free power asset
replicates the same value and delta without a bank account, and the jump-bond
hedge uses a jump-carrying bond to neutralise Merton jumps.
"""

import numpy as np

from powerhedge import MarketParams, PayoffSpec, SeedSpec, StrategySpec, TimeGrid, backtest_hedge, simulate_gbm
from powerhedge.hedgesim import ClosedFormPricer
from powerhedge.jumpdiff import JumpParams, simulate_merton

mk = MarketParams(0.1, 0.2, 0.05)
call = PayoffSpec.call(100.0)
pricer = ClosedFormPricer(mk, call, 1.0)
grid = TimeGrid(0.0, 1.0, 256)
gbm = simulate_gbm(mk, 100.0, grid, 20_000, SeedSpec(1))
merton = simulate_merton(JumpParams(0.1, 1.0, 0.9), 0.2, 100.0, grid, 20_000, SeedSpec(2), r=0.05)

runs = [("stock_bond", gbm), ("stock_power", gbm), ("stock_power_jumpbond", merton)]
print(f"{'strategy':<22}" + "".join(f"{n:>10}" for n in (4, 16, 64, 256)) + f"{'slope':>8}")
for name, paths in runs:
    rms = [backtest_hedge(StrategySpec(name, e, {"params": mk}), paths, call, pricer).rms for e in (64, 16, 4, 1)]
    slope = np.polyfit(np.log([4, 16, 64, 256]), np.log(rms), 1)[0]
    print(f"{name:<22}" + "".join(f"{x:>10.4f}" for x in rms) + f"{slope:>8.3f}")
