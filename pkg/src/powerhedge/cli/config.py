"""Run configuration: an INI file with one model section plus instrument, numerics, hedge, diag and output."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

MODEL_SECTIONS = ("gbm", "merton", "jumpz", "sv", "vov", "sesv", "fbm")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending ``section.key``."""


_MARKET = {"mu": (float, 0.1), "sigma": (float, 0.2), "r": (float, 0.05), "S0": (float, 100.0)}
_JUMP = {"alpha": (float, 0.1), "sigma": (float, 0.2), "r": (float, 0.05), "S0": (float, 100.0),
         "lam": (float, 1.0), "psi": (float, 0.9), "p": (float, 1.0)}
_VOV = {"mu": (float, 0.05), "r": (float, 0.05), "S0": (float, 100.0), "V0": (float, -1.6094379124341003),
        "v0": (float, 0.3), "phi": (float, 0.3), "psi": (float, 0.0), "b": (float, 0.0),
        "rho_V": (float, 0.0), "rho_v": (float, 0.0), "varrho": (float, 0.0), "sigma_fn": (str, "exp"),
        "sigma_level": (float, None), "ou_alpha": (float, 1.0), "ou_m": (float, -1.6094379124341003)}


def _hawkes_keys(tag):
    return {f"hawkes_{tag}_alpha": (float, 2.0), f"hawkes_{tag}_lambda_inf": (float, 1.0),
            f"hawkes_{tag}_beta": (float, 1.0), f"hawkes_{tag}_lambda_0": (float, 1.0),
            f"jump_{tag}_kind": (str, "two_point"), f"jump_{tag}_size": (float, 0.0),
            f"jump_{tag}_p": (float, 1.0), f"jump_{tag}_sd": (float, 0.0)}


SCHEMA: dict[str, dict[str, tuple]] = {
    "gbm": dict(_MARKET),
    "merton": dict(_JUMP),
    "jumpz": {**_JUMP, "a_z": (float, 0.0), "b_z": (float, 0.2), "z0": (float, 1.0), "corr": (float, 1.0)},
    "sv": {"mu": (float, 0.05), "r": (float, 0.05), "S0": (float, 100.0), "alpha": (float, 1.0),
           "m": (float, -1.6094379124341003), "phi": (float, 0.3), "rho": (float, -0.5),
           "V0": (float, -1.6094379124341003), "sigma_fn": (str, "exp"), "sigma_level": (float, None)},
    "vov": dict(_VOV),
    "sesv": {**_VOV, **_hawkes_keys("S"), **_hawkes_keys("V")},
    "fbm": {**_MARKET, "H": (float, 0.7), "n": (int, 1024), "dt": (float, 1.0), "mu_H": (float, 0.0),
            "sigma_H": (float, 0.1), "D0": (float, 1.0)},
    "instrument": {
        "payoff": (str, "call"), "strike": (float, 100.0), "maturity": (float, 1.0),
        "equation": (str, "auto"), "dividend_yield": (float, 0.0), "friction_epsilon": (float, 0.0),
        "friction_mode": (str, "corrected"), "sv_drift_y": (str, "rate"), "premium_gamma": (float, None),
        "eta": (float, 0.0), "beta_v_mvol": (float, 0.0), "beta_v_m": (float, 0.0), "theta_m": (float, 0.0),
        "theta_v": (float, 0.0), "z_discount": (str, "r"), "power_zeta": (str, "delta"), "jump_bond_m": (float, None),
    },
    "numerics": {
        "method": (str, "auto"), "measure": (str, "P"), "n_steps": (int, 252), "n_paths": (int, 10000),
        "seed": (int, 0), "grid_x": (int, 400), "grid_y": (int, 100), "grid_t": (int, 400),
        "theta": (float, 0.5), "scheme": (str, "douglas"), "rannacher_steps": (int, 2),
        "boundary": (str, "linearity"), "width": (float, 5.0), "y_width": (float, 1.5),
        "record_every": (int, 1), "threads": (int, 1), "crr_method": (str, "risk_neutral_q"),
    },
    "hedge": {"strategy": (str, "stock_bond"), "rebalance_every": (str, "1"), "epsilon": (float, 0.0),
              "friction_mode": (str, "corrected")},
    "diag": {"input": (str, ""), "column": (str, "dBH"), "path_id": (int, 0), "increments": (bool, False),
             "max_lag": (int, 100), "n_sizes": (int, 20)},
    "output": {"precision": (str, "repr"), "surface": (bool, False), "errors": (bool, False),
               "max_paths": (int, 0)},
}

OPTIONAL_SECTIONS = ("instrument", "numerics", "hedge", "diag", "output")


def _convert(section: str, key: str, typ, raw: str):
    where = f"{section}.{key}"
    raw = raw.strip()
    if typ is str:
        return raw
    if typ is bool:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{where}: expected a boolean, got {raw!r}")
    if raw.lower() in ("", "none") and typ is float:
        return None
    try:
        return typ(raw)
    except ValueError:
        raise ConfigError(f"{where}: expected {typ.__name__}, got {raw!r}") from None


@dataclass
class RunConfig:
    model: str
    sections: dict[str, dict] = field(default_factory=dict)
    source: str = ""

    def __getitem__(self, section: str) -> dict:
        return self.sections[section]

    @property
    def params(self) -> dict:
        return self.sections[self.model]

    def get(self, dotted: str):
        section, key = dotted.split(".", 1)
        return self.sections[section][key]


def _split_override(item: str):
    if "=" not in item:
        raise ConfigError(f"override {item!r}: expected section.key=value")
    key, value = item.split("=", 1)
    key = key.strip()
    if "." not in key:
        raise ConfigError(f"override {key!r}: keys must be dotted as section.key")
    section, name = key.split(".", 1)
    return section, name, value


def load_config(path: str | Path, overrides: list[str] | tuple[str, ...] = ()) -> RunConfig:
    """Parse ``path`` and apply dotted ``section.key=value`` overrides."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from None

    unknown = [s for s in parser.sections() if s not in SCHEMA]
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(unknown)}")
    models = [s for s in parser.sections() if s in MODEL_SECTIONS]
    if len(models) != 1:
        raise ConfigError(f"config needs exactly one model section ({'|'.join(MODEL_SECTIONS)}), found {len(models)}")
    model = models[0]

    raw: dict[str, dict[str, str]] = {}
    for section in (model, *OPTIONAL_SECTIONS):
        raw[section] = {}
        if parser.has_section(section):
            for key, value in parser.items(section):
                if key not in SCHEMA[section]:
                    raise ConfigError(f"{section}.{key}: unknown key")
                raw[section][key] = value

    for item in overrides:
        section, key, value = _split_override(item)
        if section not in raw:
            raise ConfigError(f"override {section}.{key}: section {section!r} is not part of this config")
        if key not in SCHEMA[section]:
            raise ConfigError(f"override {section}.{key}: unknown key")
        raw[section][key] = value

    sections = {}
    for section, given in raw.items():
        values = {k: default for k, (_, default) in SCHEMA[section].items()}
        for key, value in given.items():
            values[key] = _convert(section, key, SCHEMA[section][key][0], value)
        sections[section] = values
    cfg = RunConfig(model, sections, str(path))
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    num = cfg["numerics"]
    for key in ("n_paths", "n_steps", "grid_x", "grid_t", "record_every", "threads"):
        if num[key] < 1:
            raise ConfigError(f"numerics.{key}: must be >= 1, got {num[key]}")
    if num["grid_y"] < 3:
        raise ConfigError(f"numerics.grid_y: must be >= 3, got {num['grid_y']}")
    if not 0 <= num["seed"] < 2**64:
        raise ConfigError("numerics.seed: must be an unsigned 64-bit integer")
    if num["measure"] not in ("P", "Q"):
        raise ConfigError(f"numerics.measure: must be P or Q, got {num['measure']!r}")
    if num["n_steps"] % num["record_every"]:
        raise ConfigError("numerics.record_every: must divide numerics.n_steps")
    inst = cfg["instrument"]
    if inst["payoff"] not in ("call", "put"):
        raise ConfigError(f"instrument.payoff: must be call or put, got {inst['payoff']!r}")
    if not inst["maturity"] > 0:
        raise ConfigError("instrument.maturity: must be positive")
    if not inst["strike"] > 0:
        raise ConfigError("instrument.strike: must be positive")
    out = cfg["output"]["precision"]
    if out != "repr" and not (out.isdigit() and 1 <= int(out) <= 17):
        raise ConfigError(f"output.precision: 'repr' or 1..17 significant digits, got {out!r}")
    rebalance_counts(cfg)


def rebalance_counts(cfg: RunConfig) -> list[int]:
    raw = cfg["hedge"]["rebalance_every"]
    try:
        out = [int(v) for v in raw.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"hedge.rebalance_every: comma-separated positive integers, got {raw!r}") from None
    if not out or min(out) < 1:
        raise ConfigError(f"hedge.rebalance_every: comma-separated positive integers, got {raw!r}")
    return out
