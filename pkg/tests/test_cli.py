import io
import math
import subprocess
import sys
from pathlib import Path

import pytest

import oracles
from powerhedge.cli import ResultTable, load_config, run
from powerhedge.cli.config import ConfigError
from powerhedge.cli.tables import format_value, parse_value

BSM_ATM = float(oracles.bsm_call(100, 100, 0.05, 0.2, 1.0))

GBM = """
[gbm]
mu = 0.1
sigma = 0.2
r = 0.05
S0 = 100

[instrument]
payoff = call
strike = 100
maturity = 1.0
"""


def _cfg(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def _run(cmd, cfg, out, *over, seed=None, threads=None):
    so, se = io.StringIO(), io.StringIO()
    code = run(cmd, cfg, over, out, seed=seed, threads=threads, stdout=so, stderr=se)
    return code, so.getvalue(), se.getvalue()


def test_price_bsm_row(tmp_path):
    code, out, _ = _run("price", _cfg(tmp_path, GBM), tmp_path)
    assert code == 0
    tab = ResultTable.read(tmp_path / "price.csv")
    assert len(tab.rows) == 1
    assert abs(tab.column("price")[0] - BSM_ATM) < 0.01
    assert "wrote" in out


@pytest.mark.parametrize("method", ["crr", "pde", "mc"])
def test_price_methods_agree(tmp_path, method):
    code, _, err = _run("price", _cfg(tmp_path, GBM), tmp_path, f"numerics.method={method}", "numerics.n_paths=200000",
                        "numerics.n_steps=400")
    assert code == 0, err
    tab = ResultTable.read(tmp_path / "price.csv")
    p, se = tab.column("price")[0], tab.column("stderr")[0]
    tol = 4 * se if method == "mc" else 0.02
    assert abs(p - BSM_ATM) < tol


def test_simulate_rejects_zero_paths(tmp_path):
    code, _, err = _run("simulate", _cfg(tmp_path, GBM), tmp_path, "numerics.n_paths=0")
    assert code == 2
    assert "n_paths" in err


def test_simulate_writes_long_table(tmp_path):
    code, _, _ = _run("simulate", _cfg(tmp_path, GBM), tmp_path, "numerics.n_paths=3", "numerics.n_steps=4")
    assert code == 0
    tab = ResultTable.read(tmp_path / "paths.csv")
    assert tab.columns[:3] == ["t", "path_id", "S"]
    assert len(tab.rows) == 15
    assert tab.column("S")[0] == 100.0


def test_verify_bondless_power_asset(tmp_path):
    text = GBM + "power_zeta = delta\n\n[numerics]\nn_steps = 20\nn_paths = 100000\nseed = 3\n"
    code, _, err = _run("verify", _cfg(tmp_path, text), tmp_path)
    assert code == 0, err
    tab = ResultTable.read(tmp_path / "verify.csv")
    rows = [dict(zip(tab.columns, r)) for r in tab.rows]
    mart = [r for r in rows if r["check"] == "discounted_power_asset_Q"]
    assert mart and abs(mart[0]["z"]) <= 3 and mart[0]["pass"] == 1
    assert all(r["pass"] == 1 for r in rows)


def test_hedge_table(tmp_path):
    text = GBM + "\n[numerics]\nn_steps = 64\nn_paths = 2000\n\n[hedge]\nstrategy = stock_bond\nrebalance_every = 16,4,1\n"
    code, _, err = _run("hedge", _cfg(tmp_path, text), tmp_path)
    assert code == 0, err
    rms = ResultTable.read(tmp_path / "hedge.csv").column("rms")
    assert rms[0] > rms[1] > rms[2]


def test_diag_round_trip_from_simulated_table(tmp_path):
    fbm = "[fbm]\nmu = 0.1\nsigma = 0.2\nr = 0.05\nS0 = 100\nH = 0.8\nn = 4096\n\n[numerics]\nn_paths = 2\nseed = 1\n"
    cfg = _cfg(tmp_path, fbm)
    assert _run("simulate", cfg, tmp_path)[0] == 0
    direct = tmp_path / "direct"
    direct.mkdir()
    assert _run("diag", cfg, direct, "diag.path_id=1")[0] == 0
    via = tmp_path / "via"
    via.mkdir()
    assert _run("diag", cfg, via, f"diag.input={tmp_path / 'paths.csv'}", "diag.path_id=1")[0] == 0
    assert (direct / "lrd.csv").read_bytes() == (via / "lrd.csv").read_bytes()


def test_every_table_reads_back(tmp_path):
    code, _, _ = _run("price", _cfg(tmp_path, GBM), tmp_path, "output.precision=repr")
    assert code == 0
    tab = ResultTable.read(tmp_path / "price.csv")
    again = tmp_path / "again.csv"
    tab.write(again, "repr")
    assert again.read_bytes() == (tmp_path / "price.csv").read_bytes()


def test_override_errors(tmp_path):
    cfg = _cfg(tmp_path, GBM)
    for bad, key in (("numerics.bogus=1", "bogus"), ("nosection.x=1", "nosection"), ("justtext", "justtext"),
                     ("gbm.sigma=abc", "gbm.sigma")):
        code, _, err = _run("price", cfg, tmp_path, bad)
        assert code == 2 and key in err, err


def test_config_structure_errors(tmp_path):
    with pytest.raises(ConfigError, match="exactly one model"):
        load_config(_cfg(tmp_path, GBM + "\n[sv]\nmu = 0.1\n", "two.ini"))
    with pytest.raises(ConfigError, match="unknown"):
        load_config(_cfg(tmp_path, GBM + "\n[extras]\nx = 1\n", "extra.ini"))
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")
    code, _, err = _run("price", _cfg(tmp_path, GBM), tmp_path, "numerics.method=bogus")
    assert code == 2 and "numerics.method" in err


def test_numerical_failure_exit_code(tmp_path):
    text = "[jumpz]\nalpha = 0.1\nsigma = 0.2\nr = 0.05\nS0 = 100\nlam = 5\npsi = 0.1\na_z = 0\nb_z = 0\nz0 = 2\n\n" \
           "[numerics]\nn_paths = 100\n"
    code, _, err = _run("simulate", _cfg(tmp_path, text), tmp_path)
    assert code == 3
    assert err.startswith("numerical failure in jumpdiff")


def test_invalid_model_input_is_a_config_error(tmp_path):
    text = "[merton]\nalpha = 0.1\nsigma = 0.2\nr = 0.05\nS0 = 100\nlam = 1\npsi = 1.0\n\n" \
           "[instrument]\npayoff = call\nstrike = 100\nequation = prop8\n"
    code, _, err = _run("price", _cfg(tmp_path, text), tmp_path)
    assert code == 2 and "instrument" in err


def test_byte_determinism_across_runs_and_threads(tmp_path):
    text = GBM + "\n[numerics]\nn_steps = 8\nn_paths = 9000\nseed = 11\n"
    cfg = _cfg(tmp_path, text)
    outs = []
    for i, threads in enumerate((1, 4, 1)):
        d = tmp_path / f"o{i}"
        d.mkdir()
        assert _run("simulate", cfg, d, "output.max_paths=9000", threads=threads)[0] == 0
        outs.append((d / "paths.csv").read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_seed_flag_changes_output(tmp_path):
    cfg = _cfg(tmp_path, GBM + "\n[numerics]\nn_steps = 4\nn_paths = 5\n")
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    _run("simulate", cfg, a, seed=1)
    _run("simulate", cfg, b, seed=2)
    assert (a / "paths.csv").read_bytes() != (b / "paths.csv").read_bytes()


def test_format_and_parse_values():
    assert format_value(True, "repr") == "1"
    assert format_value(0.1, "repr") == "0.1"
    assert format_value(1 / 3, 4) == "0.3333"
    assert format_value(math.nan, "repr") == "nan"
    assert parse_value("0.1") == 0.1 and parse_value("7") == 7 and parse_value("call") == "call"
    with pytest.raises(ValueError):
        format_value("a,b", "repr")


def test_module_entry_point(tmp_path):
    cfg = _cfg(tmp_path, GBM)
    proc = subprocess.run([sys.executable, "-m", "powerhedge.cli", "price", "--config", str(cfg), "--out",
                           str(tmp_path), "--set", "numerics.method=closed_form"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert Path(tmp_path / "price.csv").exists()
    bad = subprocess.run([sys.executable, "-m", "powerhedge.cli", "price", "--config", str(cfg), "--set",
                          "numerics.n_paths=-1"], capture_output=True, text=True)
    assert bad.returncode == 2 and "n_paths" in bad.stderr
