import math

import numpy as np
import pytest

import oracles
from powerhedge.basic_assets import martingale_statistic
from powerhedge.core import MarketParams, ModelError, PayoffSpec, SeedSpec, TimeGrid, bsm_closed_form, simulate_gbm
from powerhedge.pde import solve_pde_2d, sv_domains, sv_prop12_problem
from powerhedge.stochvol import (
    PremiumSpec,
    SvParams,
    VovParams,
    mc_price,
    ou_transition,
    sigma_preset,
    simulate_sv,
    simulate_vov,
    sv_hedge_weights,
)

SV = SvParams(1.0, math.log(0.2), 0.3, -0.5)
V0 = math.log(0.2)
CALL = PayoffSpec.call(100.0)


def test_params_validation():
    for bad in ((0.0, 0.0, 0.3, 0.0), (1.0, 0.0, -0.1, 0.0), (1.0, 0.0, 0.3, 1.0)):
        with pytest.raises(ModelError):
            SvParams(*bad)
    with pytest.raises(ModelError):
        sigma_preset("bogus")
    with pytest.raises(ModelError):
        sigma_preset("const")
    y = np.array([-1.0, 0.25, 4.0])
    assert np.allclose(sigma_preset("sqrtplus")(y), [0.0, 0.5, 2.0])
    assert np.allclose(sigma_preset("abs")(y), [1.0, 0.25, 4.0])


def test_zero_factor_noise_is_deterministic_ou():
    sv = SvParams(2.0, -1.0, 0.0, 0.3)
    g = TimeGrid(0, 2, 40)
    V = simulate_sv(sv, 0.1, 100.0, 0.5, g, 10, SeedSpec(1))["V"]
    exact = -1.0 + 1.5 * np.exp(-2.0 * g.nodes)
    assert np.max(np.abs(V - exact[None, :])) < 1e-12


def test_ou_transition_is_exact():
    mean, var = ou_transition(np.array([0.7]), 1.5, 0.2, 0.4, 0.3)
    decay = math.exp(-0.45)
    assert float(mean[0]) == pytest.approx(0.2 + 0.5 * decay, abs=1e-15)
    assert var == pytest.approx(0.16 * (1 - decay**2) / 3.0, abs=1e-15)
    # one simulated step reproduces the transition moments
    sv = SvParams(1.5, 0.2, 0.4, 0.0)
    V1 = simulate_sv(sv, 0.0, 100.0, 0.7, TimeGrid(0, 0.3, 1), 100_000, SeedSpec(2))["V"][:, 1]
    n = V1.size
    assert abs(V1.mean() - float(mean[0])) < 4 * math.sqrt(var / n)
    assert abs(V1.var(ddof=1) - var) < 4 * var * math.sqrt(2 / (n - 1))


def test_stationary_moments():
    sv = SvParams(2.0, -1.5, 0.4, 0.0)
    V = simulate_sv(sv, 0.0, 100.0, 1.0, TimeGrid(0, 10, 20), 100_000, SeedSpec(3))["V"][:, -1]
    target_var = 0.16 / 4.0
    n = V.size
    assert abs(V.mean() + 1.5) < 4 * math.sqrt(target_var / n)
    assert abs(V.var(ddof=1) - target_var) < 4 * target_var * math.sqrt(2 / (n - 1))


def test_zero_correlation_gives_uncorrelated_increments():
    sv = SvParams(1.0, V0, 0.3, 0.0, sigma_fn="const", sigma_level=0.2)
    ps = simulate_sv(sv, 0.0, 100.0, V0, TimeGrid(0, 0.01, 1), 100_000, SeedSpec(4))
    dx = np.diff(np.log(ps["S"]), axis=1)[:, 0]
    dV = np.diff(ps["V"], axis=1)[:, 0]
    c = np.corrcoef(dx, dV)[0, 1]
    assert abs(c) < 4 / math.sqrt(dx.size)


def test_correlation_is_recovered():
    sv = SvParams(1.0, V0, 0.3, -0.6, sigma_fn="const", sigma_level=0.2)
    ps = simulate_sv(sv, 0.0, 100.0, V0, TimeGrid(0, 0.01, 1), 100_000, SeedSpec(5))
    c = np.corrcoef(np.diff(np.log(ps["S"]), axis=1)[:, 0], np.diff(ps["V"], axis=1)[:, 0])[0, 1]
    assert c == pytest.approx(-0.6, abs=4 * (1 - 0.36) / math.sqrt(100_000))


def test_hedge_weight_examples():
    S, V, beta = 105.0, 0.3, 1.04
    assert tuple(map(float, sv_hedge_weights(S, 1.0, 0.0, S, V, beta))) == pytest.approx((1.0, 0.0, 0.0), abs=1e-15)
    assert tuple(map(float, sv_hedge_weights(V, 0.0, 1.0, S, V, beta))) == pytest.approx((0.0, 0.0, 1.0), abs=1e-15)
    assert tuple(map(float, sv_hedge_weights(beta * 7.0, 0.0, 0.0, S, V, beta))) == pytest.approx((0.0, 7.0, 0.0))
    with pytest.raises(ModelError):
        sv_hedge_weights(1.0, 0.0, 0.0, S, V, 0.0)


def test_hedge_identity_arbitrary_inputs():
    rng = np.random.default_rng(0)
    Y, a, c, S, V = rng.normal(size=(5, 1000))
    beta = rng.uniform(0.5, 2.0, 1000)
    a_, b_, c_ = sv_hedge_weights(Y, a, c, S, V, beta)
    assert np.max(np.abs(a_ * S + b_ * beta + c_ * V - Y)) < 1e-12


def test_premium_reduces_to_rate():
    p = PremiumSpec(0.02, 0.5, 0.25, 0.04, lambda t: 0.06 + 0 * t)
    assert p.y_drift_rate(0.3) == pytest.approx(0.02 + 0.03 - 0.01, abs=1e-15)


def test_vov_correlation_checks():
    with pytest.raises(ModelError, match="non-PSD"):
        VovParams(rho_V=0.9, rho_v=0.9, varrho=-0.9)
    with pytest.raises(ModelError):
        VovParams(rho_V=1.0)
    L = VovParams(rho_V=0.3, rho_v=-0.2, varrho=0.1).correlation_factor()
    assert np.allclose(L @ L.T, VovParams(rho_V=0.3, rho_v=-0.2, varrho=0.1).correlation(), atol=1e-14)


def test_vov_zero_vols_is_deterministic():
    vp = VovParams(mu_fn=0.08, phi_fn=0.0, psi_fn=0.0, sigma_fn="const", sigma_level=0.0, ou_alpha=1.0, ou_m=0.0)
    g = TimeGrid(0, 1, 10)
    ps = simulate_vov(vp, 100.0, 0.5, 0.3, g, 4, SeedSpec(6))
    assert np.allclose(ps["S"], 100 * np.exp(0.08 * g.nodes)[None, :], rtol=1e-13)
    assert np.allclose(ps["v"], 0.3)
    ps = simulate_vov(vp, 100.0, 0.5, 0.3, g, 4, SeedSpec(6), "Q", r=0.05)
    assert np.allclose(ps["S"], 100 * np.exp(0.05 * g.nodes)[None, :], rtol=1e-13)


def _var_se(x):
    d = x - x.mean()
    return math.sqrt((np.mean(d**4) - np.mean(d**2) ** 2) / x.size)


def test_vov_reduces_to_sv_in_distribution():
    sv = SvParams(1.0, V0, 0.3, -0.5)
    vp = VovParams(mu_fn=0.1, phi_fn=0.3, psi_fn=0.0, rho_V=-0.5, ou_alpha=1.0, ou_m=V0)
    g = TimeGrid(0, 1, 100)
    a = simulate_sv(sv, 0.1, 100.0, V0, g, 100_000, SeedSpec(7))
    b = simulate_vov(vp, 100.0, V0, 0.0, g, 100_000, SeedSpec(8))
    for ch in ("S", "V"):
        x, y = a[ch][:, -1], b[ch][:, -1]
        se = math.sqrt(x.var(ddof=1) / x.size + y.var(ddof=1) / y.size)
        assert abs(x.mean() - y.mean()) < 4 * se
        assert abs(x.var() - y.var()) < 4 * math.hypot(_var_se(x), _var_se(y))
    assert np.all(b["v"] == 0.0)


def test_vov_thread_invariance():
    vp = VovParams(psi_fn=0.2, rho_V=-0.3, varrho=0.2)
    args = (vp, 100.0, -1.6, 0.3, TimeGrid(0, 1, 12), 9000, SeedSpec(9))
    assert np.array_equal(simulate_vov(*args, n_workers=1)["S"], simulate_vov(*args, n_workers=3)["S"])


def test_mc_price_deterministic_and_errors():
    vp = VovParams(phi_fn=0.0, psi_fn=0.0, sigma_fn="const", sigma_level=0.0)
    ps = simulate_vov(vp, 100.0, 0.0, 0.0, TimeGrid(0, 1, 10), 5, SeedSpec(10), "Q", r=0.05)
    p, se = mc_price(ps, CALL)
    assert p == pytest.approx(math.exp(-0.05) * (100 * math.exp(0.05) - 100), abs=1e-12) and se == 0.0
    with pytest.raises(ModelError):
        mc_price(simulate_vov(vp, 100.0, 0.0, 0.0, TimeGrid(0, 1, 2), 1, SeedSpec(1), "Q", r=0.05), CALL)


@pytest.mark.slow
def test_mc_price_gbm_matches_closed_form():
    mk = MarketParams(0.1, 0.2, 0.05)
    ps = simulate_gbm(mk, 100.0, TimeGrid(0, 1, 1), 10**6, SeedSpec(11), "Q")
    p, se = mc_price(ps, CALL, 0.05)
    assert abs(p - bsm_closed_form(mk, CALL, 100.0, 1.0)) < 3 * se


def test_discounted_levels_are_martingales_under_Q():
    ps = simulate_sv(SV, 0.1, 100.0, V0, TimeGrid(0, 1, 50), 100_000, SeedSpec(12), "Q", r=0.05)
    for ch in ("S", "V"):
        _, _, z = martingale_statistic(ps.with_channels(V=ps[ch]), 0.05)
        assert abs(z) <= 3, ch


@pytest.mark.slow
def test_mc_agrees_with_prop12_surface():
    ps = simulate_sv(SV, 0.1, 100.0, V0, TimeGrid(0, 1, 200), 200_000, SeedSpec(13), "Q", r=0.05)
    p, se = mc_price(ps, CALL, 0.05)
    xd, yd = sv_domains(SV, CALL, V0, 1.0, 0.05)
    pde = float(solve_pde_2d(sv_prop12_problem(SV, 0.05, CALL, 1.0, xd, yd, grid=(300, 150, 150)))(100.0, V0, 0.0))
    assert abs(p - pde) < 3 * se


def test_package_sv_mc_matches_independent_oracle():
    ps = simulate_sv(SV, 0.1, 100.0, V0, TimeGrid(0, 1, 50), 100_000, SeedSpec(14), "Q", r=0.05)
    p, se = mc_price(ps, CALL, 0.05)
    q, se2 = oracles.sv_mc(100_000, 50, 2024)
    assert abs(p - q) < 4 * math.hypot(se, se2)
