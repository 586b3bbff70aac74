"""Flat key/value configuration files (YAML mapping) and operating-point overrides."""

import math
import numbers
from dataclasses import replace
from pathlib import Path

import yaml

from .channel import PERFECT, PropagationEnv, UserRadio, dbm_to_watts, watts_to_dbm
from .rsma import ConfigError, SystemConfig
from .specfun import check_shape

__all__ = [
    "DEFAULTS",
    "build_config",
    "load_config",
    "config_to_mapping",
    "with_overrides",
]

# Simulation parameters from the reference scenario; delta/xi/power are free.
DEFAULTS = {
    "m1": 4,
    "m2": 3,
    "noise_dbm": -100.0,
    "p1_dbm": 10.0,
    "p2_dbm": 10.0,
    "d1_m": 75.0,
    "d2_m": 70.0,
    "pathloss_exponent": 3.8,
    "pathloss_ref_m": 1.0,
    "delta": "perfect",
    "xi_1": 0.0,
    "xi_2": 0.0,
    "alpha_21": 0.27,
    "alpha_22": 0.73,
    "rate_1": 0.7,
    "rate_2": 0.95,
    "rate_split": 0.15,
}


def _number(key, value):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ConfigError(key, "must be a number", value)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(key, "must be finite", value)
    return value


def _shape(key, value):
    try:
        return check_shape(value, key)
    except ValueError:
        raise ConfigError(
            key,
            "must be a positive integer (the closed-form outage expressions "
            "require an integer Nakagami shape)",
            value,
        ) from None


def _delta(value):
    if isinstance(value, str):
        if value.strip().lower() == "perfect":
            return PERFECT
        raise ConfigError("delta", "must be a nonnegative number or 'perfect'", value)
    if value is PERFECT:
        return PERFECT
    value = _number("delta", value)
    if value < 0:
        raise ConfigError("delta", "must be >= 0", value)
    return value


def _positive(key, value):
    value = _number(key, value)
    if not value > 0:
        raise ConfigError(key, "must be > 0", value)
    return value


def build_config(mapping=None) -> SystemConfig:
    """Validate a flat mapping (missing keys take :data:`DEFAULTS`)."""
    mapping = dict(mapping or {})
    unknown = sorted(set(mapping) - set(DEFAULTS))
    if unknown:
        raise ConfigError(unknown[0], "unknown configuration key", mapping[unknown[0]])
    raw = {**DEFAULTS, **mapping}
    env = PropagationEnv(
        noise_power=dbm_to_watts(_number("noise_dbm", raw["noise_dbm"])),
        pathloss_ref_m=_positive("pathloss_ref_m", raw["pathloss_ref_m"]),
        pathloss_exponent=_positive("pathloss_exponent", raw["pathloss_exponent"]),
        csir_quality=_delta(raw["delta"]),
    )
    user1 = UserRadio.from_dbm(
        _number("p1_dbm", raw["p1_dbm"]), _positive("d1_m", raw["d1_m"]), _shape("m1", raw["m1"])
    )
    user2 = UserRadio.from_dbm(
        _number("p2_dbm", raw["p2_dbm"]), _positive("d2_m", raw["d2_m"]), _shape("m2", raw["m2"])
    )
    try:
        return _system_config(raw, user1, user2, env)
    except ConfigError as exc:
        raise ConfigError(_FILE_KEYS.get(exc.field, exc.field), exc.constraint, exc.value) from None


_FILE_KEYS = {"sic_residual_1": "xi_1", "sic_residual_2": "xi_2"}


def _system_config(raw, user1, user2, env):
    return SystemConfig(
        user1=user1,
        user2=user2,
        env=env,
        alpha_21=_number("alpha_21", raw["alpha_21"]),
        alpha_22=_number("alpha_22", raw["alpha_22"]),
        sic_residual_1=_number("xi_1", raw["xi_1"]),
        sic_residual_2=_number("xi_2", raw["xi_2"]),
        rate_1=_number("rate_1", raw["rate_1"]),
        rate_2=_number("rate_2", raw["rate_2"]),
        rate_split=_number("rate_split", raw["rate_split"]),
    )


def load_config(path) -> SystemConfig:
    """Read and validate a configuration file; an empty file gives the defaults."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}", str(path)) from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"cannot parse {path}", str(exc)) from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a key/value mapping", type(data).__name__)
    return build_config(data)


def config_to_mapping(cfg: SystemConfig) -> dict:
    delta = cfg.env.csir_quality
    return {
        "m1": cfg.user1.nakagami_m,
        "m2": cfg.user2.nakagami_m,
        "noise_dbm": watts_to_dbm(cfg.env.noise_power),
        "p1_dbm": cfg.user1.power_dbm,
        "p2_dbm": cfg.user2.power_dbm,
        "d1_m": cfg.user1.distance_m,
        "d2_m": cfg.user2.distance_m,
        "pathloss_exponent": cfg.env.pathloss_exponent,
        "pathloss_ref_m": cfg.env.pathloss_ref_m,
        "delta": "perfect" if delta is PERFECT else delta,
        "xi_1": cfg.sic_residual_1,
        "xi_2": cfg.sic_residual_2,
        "alpha_21": cfg.alpha_21,
        "alpha_22": cfg.alpha_22,
        "rate_1": cfg.rate_1,
        "rate_2": cfg.rate_2,
        "rate_split": cfg.rate_split,
    }


def with_overrides(cfg: SystemConfig, **kw) -> SystemConfig:
    """Return ``cfg`` with operating-point parameters replaced.

    Accepted keywords: ``tx_power_dbm`` (both users), ``p1_dbm``, ``p2_dbm``,
    ``delta``, ``xi_1``, ``xi_2``, ``rate_split``, ``rate_1``, ``rate_2``,
    ``d1_m``, ``d2_m``, ``distance_m`` (both users).
    """
    user1, user2, env = cfg.user1, cfg.user2, cfg.env
    if "tx_power_dbm" in kw:
        kw.setdefault("p1_dbm", kw["tx_power_dbm"])
        kw.setdefault("p2_dbm", kw.pop("tx_power_dbm"))
    if "distance_m" in kw:
        kw.setdefault("d1_m", kw["distance_m"])
        kw.setdefault("d2_m", kw.pop("distance_m"))
    if "p1_dbm" in kw:
        user1 = replace(user1, transmit_power=dbm_to_watts(kw.pop("p1_dbm")))
    if "p2_dbm" in kw:
        user2 = replace(user2, transmit_power=dbm_to_watts(kw.pop("p2_dbm")))
    if "d1_m" in kw:
        user1 = replace(user1, distance_m=kw.pop("d1_m"))
    if "d2_m" in kw:
        user2 = replace(user2, distance_m=kw.pop("d2_m"))
    if "delta" in kw:
        env = replace(env, csir_quality=_delta(kw.pop("delta")))
    renames = {"xi_1": "sic_residual_1", "xi_2": "sic_residual_2"}
    fields = {}
    for key in list(kw):
        if key in renames:
            fields[renames[key]] = kw.pop(key)
        elif key in ("rate_split", "rate_1", "rate_2"):
            fields[key] = kw.pop(key)
    if kw:
        raise TypeError(f"unknown override(s): {sorted(kw)}")
    return cfg.replace(user1=user1, user2=user2, env=env, **fields)
