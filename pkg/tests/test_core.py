import math

import numpy as np
import pytest

import oracles
from powerhedge.core import (
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

MK = MarketParams(0.1, 0.2, 0.05)
BSM_ATM = 10.450583572185567  # mpmath closed form, S0=K=100, r=0.05, sigma=0.2, T=1


def test_frozen_bsm_matches_mpmath():
    assert float(oracles.bsm_call(100, 100, 0.05, 0.2, 1.0)) == pytest.approx(BSM_ATM, abs=1e-14)


def test_market_params_validation():
    with pytest.raises(ModelError):
        MarketParams(0.1, 0.0, 0.05)
    with pytest.raises(ModelError):
        MarketParams(0.1, 0.2, -0.01)
    assert MK.drift("P") == 0.1 and MK.drift("Q") == 0.05


def test_time_grid():
    g = TimeGrid(0.0, 1.0, 4)
    assert g.dt == 0.25
    assert np.all(np.diff(g.nodes) > 0) and g.nodes[-1] == 1.0
    with pytest.raises(ModelError):
        TimeGrid(1.0, 1.0, 4)
    with pytest.raises(ModelError):
        TimeGrid(0.0, 1.0, 0)


def test_payoff_spec():
    assert PayoffSpec.call(100)(np.array([90.0, 110.0])).tolist() == [0.0, 10.0]
    assert PayoffSpec.put(100)(np.array([90.0, 110.0])).tolist() == [10.0, 0.0]
    with pytest.raises(ModelError):
        PayoffSpec.call(0.0)
    with pytest.raises(ModelError):
        PayoffSpec.custom([1.0, 1.0], [0.0, 1.0])
    tab = PayoffSpec.custom([1.0, 2.0, 3.0], [0.0, 1.0, 4.0])
    assert tab(np.array([2.5]))[0] == pytest.approx(2.5)


def test_bsm_closed_form_matches_oracle():
    assert bsm_closed_form(MK, PayoffSpec.call(100), 100.0, 1.0) == pytest.approx(BSM_ATM, abs=5e-13)
    put = float(oracles.bsm_put(100, 110, 0.05, 0.2, 1.0))
    assert bsm_closed_form(MK, PayoffSpec.put(110), 100.0, 1.0) == pytest.approx(put, abs=1e-12)


def test_bsm_limits():
    near = bsm_closed_form(MK, PayoffSpec.call(100), 100.0, 1e-12)
    assert near == pytest.approx(0.0, abs=1e-5)
    det = bsm_closed_form(MarketParams(0.1, 1e-9, 0.0), PayoffSpec.call(50), 100.0, 1.0)
    assert det == pytest.approx(50.0, abs=1e-10)


def test_put_call_parity():
    S = np.linspace(60, 150, 19)
    c = bsm_closed_form(MK, PayoffSpec.call(100), S, 0.7)
    p = bsm_closed_form(MK, PayoffSpec.put(100), S, 0.7)
    assert np.max(np.abs(c - p - (S - 100 * math.exp(-0.05 * 0.7)))) < 1e-12


def test_bsm_rejects_custom():
    with pytest.raises(ModelError):
        bsm_closed_form(MK, PayoffSpec.custom([1, 2], [0, 1]), 100.0, 1.0)


def test_bsm_delta_is_derivative():
    h = 1e-4
    up = bsm_closed_form(MK, PayoffSpec.call(100), 100 + h, 1.0)
    dn = bsm_closed_form(MK, PayoffSpec.call(100), 100 - h, 1.0)
    assert bsm_delta(MK, PayoffSpec.call(100), 100.0, 1.0) == pytest.approx((up - dn) / (2 * h), abs=1e-8)


def test_gbm_mean_under_P():
    ps = simulate_gbm(MK, 100.0, TimeGrid(0, 1, 10), 100_000, SeedSpec(1), "P")
    ST = ps["S"][:, -1]
    se = ST.std(ddof=1) / math.sqrt(ST.size)
    assert abs(ST.mean() - 100 * math.exp(0.1)) < 3 * se


def test_gbm_zero_vol_is_deterministic():
    ps = simulate_gbm(MarketParams(0.1, 1e-300, 0.05), 100.0, TimeGrid(0, 1, 5), 7, SeedSpec(3))
    assert np.allclose(ps["S"][:, -1], 100 * math.exp(0.1), rtol=1e-14, atol=0)


def test_gbm_log_increment_moments():
    g = TimeGrid(0, 1, 20)
    S = simulate_gbm(MK, 100.0, g, 100_000, SeedSpec(4))["S"]
    x = np.diff(np.log(S), axis=1)[:, 3]
    n = x.size
    mean_target = (0.1 - 0.02) * g.dt
    var_target = 0.04 * g.dt
    assert abs(x.mean() - mean_target) < 4 * math.sqrt(var_target / n)
    assert abs(x.var(ddof=1) - var_target) < 4 * var_target * math.sqrt(2.0 / (n - 1))


def test_gbm_thread_count_invariance():
    args = (MK, 100.0, TimeGrid(0, 1, 16), 10_000, SeedSpec(99))
    a = simulate_gbm(*args, n_workers=1)["S"]
    b = simulate_gbm(*args, n_workers=4)["S"]
    assert np.array_equal(a, b)
    again = simulate_gbm(*args)["S"]
    assert np.array_equal(a, again)


def test_path_prefix_stability():
    g = TimeGrid(0, 1, 8)
    small = simulate_gbm(MK, 100.0, g, 10, SeedSpec(5))["S"]
    big = simulate_gbm(MK, 100.0, g, 5000, SeedSpec(5))["S"]
    assert np.array_equal(small, big[:10])


def test_seed_spec_streams_are_distinct():
    s = SeedSpec(1)
    a = s.generator("dB", 0).standard_normal(4)
    b = s.generator("dW", 0).standard_normal(4)
    c = s.generator("dB", 1).standard_normal(4)
    assert not np.array_equal(a, b) and not np.array_equal(a, c)
    with pytest.raises(ModelError):
        SeedSpec(-1)


def test_pathset_shape_checks():
    g = TimeGrid(0, 1, 3)
    with pytest.raises(ModelError):
        PathSet(g, {"S": np.ones((2, 3))})
    with pytest.raises(ModelError):
        PathSet(g, {"S": np.ones((2, 4)), "V": np.ones((3, 4))})
    ps = PathSet(g, {"S": np.ones((2, 4))})
    with pytest.raises(ModelError):
        ps["V"]


def test_bond_path():
    assert bond_path(0.05, np.array([1.0]))[0] == pytest.approx(1.051271096376024, abs=1e-14)
    assert np.all(bond_path(0.0, TimeGrid(0, 1, 4)) == 1.0)
    assert bond_path(0.05, TimeGrid(0, 1, 4))[0] == 1.0
