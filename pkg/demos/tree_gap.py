"""Compare the two backward inductions on a CRR tree as the step count grows.

The risk-neutral sweep uses the usual first-order up probability; the hedge sweep
uses the state prices implied by the stock and the bond-free power asset.  Both
converge to Black-Scholes and their root gap shrinks like 1/n.  The implied
one-step discount differs from exp(-r dt) by O(dt^2), so the largest node gap
sits at deep in-the-money nodes, where the value is of order 1e5.
"""

import numpy as np

from powerhedge import MarketParams, PayoffSpec, bsm_closed_form, crr_build, crr_price

mk = MarketParams(0.1, 0.2, 0.05)
call = PayoffSpec.call(100.0)
exact = float(bsm_closed_form(mk, call, 100.0, 1.0, 0.0))

print(f"{'n':>6} {'risk-neutral':>13} {'hedge':>13} {'root gap':>10} {'n * root':>9} {'max node gap':>13}")
for n in (50, 100, 200, 400, 800, 1600):
    tree = crr_build(mk, 100.0, 1.0, n)
    a = crr_price(tree, call, "risk_neutral_q", return_levels=True)
    b = crr_price(tree, call, "v_hedge", return_levels=True)
    gap = max(float(np.max(np.abs(x - y))) for x, y in zip(a, b))
    print(f"{n:>6} {a[0][0]:>13.6f} {b[0][0]:>13.6f} {abs(a[0][0] - b[0][0]):>10.2e} {n * abs(a[0][0] - b[0][0]):>9.5f} {gap:>13.2e}")
print(f"{'BSM':>6} {exact:>13.6f}")
