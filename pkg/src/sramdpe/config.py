"""Experiment configuration: versioned JSON schema, strict validation.

Unknown keys are rejected anywhere in the tree; omitted keys take defaults.
Every run writes its fully-resolved config next to its outputs so results are
reproducible from the artifacts alone.
"""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

from .crossbar import DEFAULT_V_BIAS, ArrayGeometry, DriveMode
from .device import PROFILES, DeviceParams
from .energy import EnergyParams
from .errors import ConfigError
from .network import (
    BothEnds,
    IdealOpamp,
    ParasiticSpec,
    SenseResistor,
    SingleEnd,
    TappedEvery,
)

SCHEMA_VERSION = 1

DEFAULT_CONFIG: dict = {
    "version": SCHEMA_VERSION,
    "seed": 0,
    "device_profile": "default-45",
    "geometry": {"rows": 64, "word_columns": 32},
    "excitation": {"mode": "config_b", "v_dd": 0.65, "v_bias": DEFAULT_V_BIAS},
    "parasitics": {
        "r_bl_per_cell": 1.25,
        "r_sl_per_cell": 2.5,
        "lumped_inactive": True,
    },
    "drive_variant": {"kind": "tapped", "k": 16},
    "termination": {"kind": "ideal_opamp", "v_pos": 0.1, "r": 50.0},
    "variation": {
        "sigma_min": 0.030,
        "trials": 1000,
        "mc_voltages": [round(0.35 + 0.025 * k, 3) for k in range(14)],
        "mc_weights": list(range(16)),
        "mc_rows": 16,
    },
    "sweep": {
        "v_start": 0.0,
        "v_stop": 0.65,
        "v_step": 0.025,
        "iv_weights": [0, 4, 10, 15],
        "weight_voltages_a": [0.05, 0.10, 0.15],
        "weight_voltages_b": [0.50, 0.55, 0.60],
        "row_counts": [1, 2, 4, 8, 16, 32, 64],
        "sense_r": 50.0,
        "map_voltages": [round(0.35 + 0.025 * k, 3) for k in range(14)],
        "map_weights": list(range(16)),
        "map_active_rows": [16, 8],
    },
    "nn": {
        "epochs": 150,
        "lr": 0.5,
        "batch_size": 32,
        "train_per_class": 120,
        "test_per_class": 40,
        "noise_sigma": 0.10,
        "adc_bits": 8,
        "tile_rows": 16,
        "normalization_anchor": "center",
        "weights_in": None,
        "dataset_csv": None,
        "fit_voltages": [0.425, 0.5, 0.6, 0.675],
        "fit_weights": [3, 7, 11, 15],
        "fit_trials": 400,
    },
    "energy": {
        "params_file": None,
        "weight_level": 3,
        "input_level": 0.5,
        "rows": 16,
        "words": 16,
        "em_current_ceiling": None,
    },
}

_PROFILE_KEYS = {"name", "vt0", "k_prime", "w_over_l", "lambda",
                 "subthreshold_i0", "subthreshold_n", "phi_t"}


def _merge_strict(defaults, given, path=""):
    if not isinstance(given, dict):
        raise ConfigError(f"config section {path or '<root>'} must be an object")
    unknown = set(given) - set(defaults)
    if unknown:
        raise ConfigError(
            f"unknown config key(s) at {path or '<root>'}: {sorted(unknown)}"
        )
    out = copy.deepcopy(defaults)
    for key, val in given.items():
        here = f"{path}.{key}" if path else key
        if isinstance(defaults[key], dict) and defaults[key]:
            out[key] = _merge_strict(defaults[key], val, here)
        else:
            out[key] = copy.deepcopy(val)
    return out


def resolve_config(raw: dict | None) -> dict:
    """Validate a raw config dict against the schema; fill defaults."""
    raw = dict(raw or {})
    profile = raw.pop("device_profile", DEFAULT_CONFIG["device_profile"])
    cfg = _merge_strict(
        {k: v for k, v in DEFAULT_CONFIG.items() if k != "device_profile"},
        raw,
    )
    cfg["device_profile"] = _validate_profile(profile)
    if cfg["version"] != SCHEMA_VERSION:
        raise ConfigError(
            f"config version {cfg['version']} unsupported "
            f"(expected {SCHEMA_VERSION})"
        )
    if cfg["excitation"]["mode"] not in ("config_a", "config_b"):
        raise ConfigError("excitation.mode must be 'config_a' or 'config_b'")
    if cfg["drive_variant"]["kind"] not in ("single_end", "both_ends", "tapped"):
        raise ConfigError("drive_variant.kind must be one of "
                          "single_end/both_ends/tapped")
    if cfg["termination"]["kind"] not in ("sense_resistor", "ideal_opamp"):
        raise ConfigError("termination.kind must be sense_resistor/ideal_opamp")
    return cfg


def _validate_profile(profile):
    if isinstance(profile, str):
        if profile not in PROFILES:
            raise ConfigError(
                f"unknown device profile {profile!r}; "
                f"known: {sorted(PROFILES)}"
            )
        return profile
    if isinstance(profile, dict):
        unknown = set(profile) - _PROFILE_KEYS
        if unknown:
            raise ConfigError(f"unknown device_profile key(s): {sorted(unknown)}")
        return dict(profile)
    raise ConfigError("device_profile must be a name or an object")


def load_config(path: str | Path | None) -> dict:
    if path is None:
        return resolve_config({})
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    return resolve_config(raw)


def config_sha256(cfg: dict) -> str:
    dump = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(dump.encode()).hexdigest()


# -- factories -------------------------------------------------------------


def device_profile(cfg: dict) -> DeviceParams:
    p = cfg["device_profile"]
    if isinstance(p, str):
        return PROFILES[p]
    base = PROFILES.get(p.get("name", "default-45"), DeviceParams())
    kwargs = {}
    for key in _PROFILE_KEYS - {"name"}:
        if key in p:
            kwargs["lam" if key == "lambda" else key] = float(p[key])
    from dataclasses import replace

    return replace(base, **kwargs)


def geometry(cfg: dict, **overrides) -> ArrayGeometry:
    g = cfg["geometry"]
    args = {"rows": int(g["rows"]), "word_columns": int(g["word_columns"])}
    args.update(overrides)
    return ArrayGeometry(**args)


def parasitics(cfg: dict) -> ParasiticSpec:
    p = cfg["parasitics"]
    return ParasiticSpec(
        r_bl_per_cell=float(p["r_bl_per_cell"]),
        r_sl_per_cell=float(p["r_sl_per_cell"]),
        lumped_inactive=bool(p["lumped_inactive"]),
    )


def drive_variant(cfg: dict):
    d = cfg["drive_variant"]
    if d["kind"] == "single_end":
        return SingleEnd()
    if d["kind"] == "both_ends":
        return BothEnds()
    return TappedEvery(int(d["k"]))


def termination(cfg: dict):
    t = cfg["termination"]
    if t["kind"] == "sense_resistor":
        return SenseResistor(float(t["r"]))
    return IdealOpamp(float(t["v_pos"]))


def drive_mode(cfg: dict) -> DriveMode:
    return DriveMode(cfg["excitation"]["mode"])


def energy_params(cfg: dict) -> EnergyParams:
    e = cfg["energy"]
    if e["params_file"]:
        return EnergyParams.from_json(Path(e["params_file"]).read_text())
    return EnergyParams()
