"""Configuration boundary: problem configs, scenario files, fit data.

Configs and scenarios are JSON; calibration data is a two-column CSV with a
header row (a JSON {token_lengths, losses} object is also accepted). Powers
may be given in watts or dBm (exactly one of the paired keys), and the same
pattern applies to the noise density and the text side channel. Every
rejection message names the offending field and the violated constraint.
"""

import csv
import io
import json
import math

from .errors import ConfigError
from .perf import FitDataset, PerfModel
from .scenario import (DEFAULT_PRESETS, METHODS, SWEEP_PARAMETERS,
                       DevicePreset, Scenario)
from .system import DeviceState, SystemConfig, channel_gain, dbm_to_watt

__all__ = [
    "load_json", "parse_config", "load_config", "parse_scenario",
    "load_scenario", "parse_fit_data", "parse_fit_csv", "load_fit_data",
    "CONFIG_SCHEMA", "SCENARIO_SCHEMA", "ALLOCATION_OUTPUT_SCHEMA",
    "FIT_OUTPUT_SCHEMA", "LINK_OUTPUT_SCHEMA",
]


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None


def _number(obj, key, path, *, required=True, default=None,
            minimum=None, maximum=None, exclusive_min=None, integer=False):
    if key not in obj:
        if required:
            raise ConfigError(f"{path}.{key} is required")
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key} must be a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"{path}.{key} must be an integer, got {value!r}")
    value = int(value) if integer else float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{path}.{key} must be finite, got {value!r}")
    if exclusive_min is not None and value <= exclusive_min:
        raise ConfigError(f"{path}.{key} must be > {exclusive_min}, got {value}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}.{key} must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ConfigError(f"{path}.{key} must be <= {maximum}, got {value}")
    return value


def _dual_watt(obj, watt_key, dbm_key, path, *, required=True, default=None):
    """Exactly one of ``watt_key``/``dbm_key``; returns watts."""
    has_w, has_dbm = watt_key in obj, dbm_key in obj
    if has_w and has_dbm:
        raise ConfigError(f"{path}: give exactly one of {watt_key} or {dbm_key}, not both")
    if not has_w and not has_dbm:
        if required:
            raise ConfigError(f"{path}: one of {watt_key} or {dbm_key} is required")
        return default
    if has_w:
        return _number(obj, watt_key, path, exclusive_min=0.0)
    return dbm_to_watt(_number(obj, dbm_key, path))


def _perf_model(obj, path):
    if not isinstance(obj, dict):
        raise ConfigError(f"{path} must be an object with alpha, beta, gamma")
    alpha = _number(obj, "alpha", path, minimum=0.0)
    beta = _number(obj, "beta", path, minimum=0.0)
    gamma = _number(obj, "gamma", path, minimum=0.0)
    try:
        return PerfModel(alpha=alpha, beta=beta, gamma=gamma)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _system_config(obj, path="config"):
    if not isinstance(obj, dict):
        raise ConfigError(f"{path} must be a JSON object")
    kwargs = {}
    if "b_max_hz" in obj:
        kwargs["total_bandwidth"] = _number(obj, "b_max_hz", path, exclusive_min=0.0)
    p_max = _dual_watt(obj, "p_max_w", "p_max_dbm", path, required=False)
    if p_max is not None:
        kwargs["total_power"] = p_max
    noise = _dual_watt(obj, "noise_psd_w_per_hz", "noise_psd_dbm_per_hz", path, required=False)
    if noise is not None:
        kwargs["noise_psd"] = noise
    if "lambda_weight" in obj:
        kwargs["lambda_weight"] = _number(obj, "lambda_weight", path, minimum=0.0, maximum=1.0)
    if "bits_per_token" in obj:
        kwargs["bits_per_token"] = _number(obj, "bits_per_token", path, exclusive_min=0.0)
    if "text_b_hz" in obj:
        kwargs["text_bandwidth"] = _number(obj, "text_b_hz", path, minimum=0.0)
    text_p = _dual_watt(obj, "text_p_w", "text_p_dbm", path, required=False)
    if text_p is not None:
        kwargs["text_power"] = text_p
    if "tolerance" in obj:
        kwargs["tolerance"] = _number(obj, "tolerance", path, exclusive_min=0.0)
    if "max_ao_iters" in obj:
        kwargs["max_ao_iters"] = _number(obj, "max_ao_iters", path, minimum=1, integer=True)
    return SystemConfig(**kwargs)


def _device(obj, index, cfg):
    path = f"devices[{index}]"
    if not isinstance(obj, dict):
        raise ConfigError(f"{path} must be a JSON object")
    dev_id = _number(obj, "id", path, required=False, default=index + 1, integer=True)
    has_d, has_g = "distance_km" in obj, "channel_gain" in obj
    if has_d and has_g:
        raise ConfigError(f"{path}: give exactly one of distance_km or channel_gain, not both")
    if has_g:
        if "fading" in obj:
            raise ConfigError(f"{path}: fading only applies with distance_km")
        gain = _number(obj, "channel_gain", path, exclusive_min=0.0)
        distance = math.nan
    elif has_d:
        distance = _number(obj, "distance_km", path, exclusive_min=0.0)
        fading = _number(obj, "fading", path, required=False, exclusive_min=0.0)
        gain = channel_gain(distance, fading)
    else:
        raise ConfigError(f"{path}: one of distance_km or channel_gain is required")
    max_bw = _number(obj, "b_max_hz", path, required=False,
                     default=cfg.total_bandwidth, exclusive_min=0.0)
    max_p = _dual_watt(obj, "p_max_w", "p_max_dbm", path, required=False,
                       default=cfg.total_power)
    s_max = _number(obj, "s_max", path, minimum=0.0)
    if "perf" not in obj:
        raise ConfigError(f"{path}.perf is required")
    perf = _perf_model(obj["perf"], f"{path}.perf")
    return DeviceState(id=dev_id, distance=distance, channel_gain=gain,
                       max_bandwidth=max_bw, max_power=max_p,
                       max_tokens=s_max, perf=perf)


def parse_config(obj):
    """Validate a problem-config document; returns (devices, cfg)."""
    cfg = _system_config(obj)
    devices_obj = obj.get("devices")
    if not isinstance(devices_obj, list) or not devices_obj:
        raise ConfigError("devices must be a nonempty array")
    devices = [_device(d, i, cfg) for i, d in enumerate(devices_obj)]
    ids = [d.id for d in devices]
    if len(set(ids)) != len(ids):
        raise ConfigError("devices: ids must be unique")
    return devices, cfg


def load_config(path):
    return parse_config(load_json(path))


def _preset(obj, index):
    path = f"device_presets[{index}]"
    if not isinstance(obj, dict):
        raise ConfigError(f"{path} must be a JSON object")
    if "perf" not in obj:
        raise ConfigError(f"{path}.perf is required")
    perf = _perf_model(obj["perf"], f"{path}.perf")
    s_max = _number(obj, "s_max", path, minimum=0.0)
    max_bw = _number(obj, "b_max_hz", path, required=False, exclusive_min=0.0)
    max_p = _dual_watt(obj, "p_max_w", "p_max_dbm", path, required=False)
    return DevicePreset(perf=perf, max_tokens=s_max,
                        max_bandwidth=max_bw, max_power=max_p)


def parse_scenario(obj):
    """Validate a scenario document; returns a Scenario."""
    if not isinstance(obj, dict):
        raise ConfigError("scenario must be a JSON object")
    seed = _number(obj, "seed", "scenario", integer=True)
    num_devices = _number(obj, "num_devices", "scenario", required=False,
                          default=2, minimum=1, integer=True)
    trials = _number(obj, "trials", "scenario", required=False, default=100,
                     minimum=1, integer=True)
    rng = obj.get("distance_range", [0.3, 0.5])
    if (not isinstance(rng, list) or len(rng) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in rng)):
        raise ConfigError("scenario.distance_range must be [low, high]")
    sweep = obj.get("sweep")
    if not isinstance(sweep, dict):
        raise ConfigError("scenario.sweep must be an object {parameter, values}")
    parameter = sweep.get("parameter")
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError(f"scenario.sweep.parameter must be one of {SWEEP_PARAMETERS}, got {parameter!r}")
    has_vals, has_dbm = "values" in sweep, "values_dbm" in sweep
    if has_vals == has_dbm:
        raise ConfigError("scenario.sweep: give exactly one of values or values_dbm")
    if has_dbm and parameter != "power":
        raise ConfigError("scenario.sweep.values_dbm only applies to the power parameter")
    raw_values = sweep["values_dbm"] if has_dbm else sweep["values"]
    if not isinstance(raw_values, list) or not raw_values:
        raise ConfigError("scenario.sweep values must be a nonempty array")
    for v in raw_values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"scenario.sweep values must be numbers, got {v!r}")
    values = [dbm_to_watt(v) for v in raw_values] if has_dbm else [float(v) for v in raw_values]
    methods = obj.get("methods", ["proposed", "pbwf", "era"])
    if not isinstance(methods, list) or not methods:
        raise ConfigError("scenario.methods must be a nonempty array")
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"scenario.methods entries must be in {METHODS}, got {m!r}")
    presets_obj = obj.get("device_presets")
    if presets_obj is None:
        presets = DEFAULT_PRESETS
    else:
        if not isinstance(presets_obj, list) or not presets_obj:
            raise ConfigError("scenario.device_presets must be a nonempty array")
        presets = tuple(_preset(p, i) for i, p in enumerate(presets_obj))
    base = _system_config(obj.get("config", {}), path="scenario.config")
    fading = obj.get("fading", "none")
    if fading not in ("none", "exponential"):
        raise ConfigError(f"scenario.fading must be 'none' or 'exponential', got {fading!r}")
    oracle_grid = _number(obj, "oracle_grid", "scenario", required=False,
                          default=16, minimum=8, integer=True)
    try:
        return Scenario(num_devices=num_devices,
                        distance_range=(float(rng[0]), float(rng[1])),
                        seed=seed, device_presets=presets,
                        sweep_parameter=parameter, sweep_values=tuple(values),
                        trials=trials, methods=tuple(methods), base=base,
                        fading=fading, oracle_grid=oracle_grid)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"scenario: {exc}") from None


def load_scenario(path):
    return parse_scenario(load_json(path))


def parse_fit_data(obj):
    """Validate calibration data {token_lengths: [...], losses: [...]}."""
    if not isinstance(obj, dict):
        raise ConfigError("fit data must be a JSON object")
    for key in ("token_lengths", "losses"):
        arr = obj.get(key)
        if not isinstance(arr, list) or not arr:
            raise ConfigError(f"fit data.{key} must be a nonempty array")
        for v in arr:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"fit data.{key} must contain numbers, got {v!r}")
    try:
        return FitDataset(token_lengths=tuple(obj["token_lengths"]),
                          losses=tuple(obj["losses"]))
    except ValueError as exc:
        raise ConfigError(f"fit data: {exc}") from None


def parse_fit_csv(text, path="fit data"):
    """Two-column CSV: header row, then (token length, loss) pairs."""
    rows = [r for r in csv.reader(io.StringIO(text))
            if r and any(cell.strip() for cell in r)]
    if len(rows) < 2:
        raise ConfigError(f"{path}: need a header row and at least one data row")
    header = rows[0]
    if len(header) != 2:
        raise ConfigError(f"{path}: expected two columns (tokens, loss), "
                          f"got {len(header)}")
    try:
        float(header[0]), float(header[1])
    except ValueError:
        pass
    else:
        raise ConfigError(f"{path}: first row must be a header, got numbers "
                          f"{header!r}")
    lengths, losses = [], []
    for ln, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise ConfigError(f"{path} line {ln}: expected two columns, "
                              f"got {len(row)}")
        try:
            lengths.append(float(row[0]))
            losses.append(float(row[1]))
        except ValueError:
            raise ConfigError(f"{path} line {ln}: non-numeric entry {row!r}") from None
    try:
        return FitDataset(token_lengths=tuple(lengths), losses=tuple(losses))
    except ValueError as exc:
        raise ConfigError(f"fit data: {exc}") from None


def load_fit_data(path):
    """CSV (two columns with a header) or JSON {token_lengths, losses},
    sniffed by the leading character."""
    try:
        with open(path) as fh:
            text = fh.read()
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    if text.lstrip().startswith("{"):
        try:
            return parse_fit_data(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return parse_fit_csv(text, str(path))


_NUMBER = {"type": "number"}
_NUMBER_ARRAY = {"type": "array", "items": _NUMBER, "minItems": 1}
_PERF_SCHEMA = {
    "type": "object",
    "properties": {"alpha": _NUMBER, "beta": _NUMBER, "gamma": _NUMBER},
    "required": ["alpha", "beta", "gamma"],
}

CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "Problem configuration",
    "type": "object",
    "properties": {
        "b_max_hz": _NUMBER,
        "p_max_w": _NUMBER, "p_max_dbm": _NUMBER,
        "noise_psd_w_per_hz": _NUMBER, "noise_psd_dbm_per_hz": _NUMBER,
        "lambda_weight": {"type": "number", "minimum": 0, "maximum": 1},
        "bits_per_token": _NUMBER,
        "text_b_hz": _NUMBER, "text_p_w": _NUMBER, "text_p_dbm": _NUMBER,
        "tolerance": _NUMBER, "max_ao_iters": {"type": "integer", "minimum": 1},
        "devices": {
            "type": "array", "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "id": {"type": "integer"},
                    "distance_km": _NUMBER, "channel_gain": _NUMBER,
                    "fading": _NUMBER,
                    "b_max_hz": _NUMBER, "p_max_w": _NUMBER, "p_max_dbm": _NUMBER,
                    "s_max": _NUMBER,
                    "perf": _PERF_SCHEMA,
                },
                "required": ["s_max", "perf"],
            },
        },
    },
    "required": ["devices"],
}

SCENARIO_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "Sweep scenario",
    "type": "object",
    "properties": {
        "seed": {"type": "integer"},
        "num_devices": {"type": "integer", "minimum": 1},
        "trials": {"type": "integer", "minimum": 1},
        "distance_range": {"type": "array", "items": _NUMBER,
                           "minItems": 2, "maxItems": 2},
        "sweep": {
            "type": "object",
            "properties": {
                "parameter": {"enum": list(SWEEP_PARAMETERS)},
                "values": _NUMBER_ARRAY,
                "values_dbm": _NUMBER_ARRAY,
            },
            "required": ["parameter"],
        },
        "methods": {"type": "array", "items": {"enum": list(METHODS)}, "minItems": 1},
        "device_presets": {"type": "array", "minItems": 1},
        "config": {"type": "object"},
        "fading": {"enum": ["none", "exponential"]},
        "oracle_grid": {"type": "integer", "minimum": 8},
    },
    "required": ["seed", "sweep"],
}

ALLOCATION_OUTPUT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "Solve/oracle output",
    "type": "object",
    "properties": {
        "method": {"type": "string"},
        "allocation": {
            "type": "object",
            "properties": {
                "bandwidth_hz": _NUMBER_ARRAY,
                "power_w": _NUMBER_ARRAY,
                "tokens": _NUMBER_ARRAY,
                "aux_latency_s": _NUMBER,
            },
            "required": ["bandwidth_hz", "power_w", "tokens", "aux_latency_s"],
        },
        "cost": {
            "type": "object",
            "properties": {
                "total": _NUMBER,
                "latency_term": _NUMBER,
                "perf_term": _NUMBER,
                "per_device_latency_s": _NUMBER_ARRAY,
            },
            "required": ["total", "latency_term", "perf_term"],
        },
        "devices": {"type": "array", "minItems": 1},
        "converged": {"type": ["boolean", "null"]},
        "half_steps": {"type": ["integer", "null"]},
    },
    "required": ["method", "allocation", "cost"],
}

FIT_OUTPUT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "Fit output",
    "type": "object",
    "properties": {
        "alpha": _NUMBER, "beta": _NUMBER, "gamma": _NUMBER,
        "sse": _NUMBER, "degenerate": {"type": "boolean"},
    },
    "required": ["alpha", "beta", "gamma", "sse", "degenerate"],
}

LINK_OUTPUT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "Link simulation output",
    "type": "object",
    "properties": {
        "rows": {"type": "integer"}, "cols": {"type": "integer"},
        "pooled_rows": {"type": "integer"}, "window": {"type": "integer"},
        "snr_db": _NUMBER, "trials": {"type": "integer"},
        "noise_var": _NUMBER, "empirical_mse": _NUMBER,
        "theoretical_mse": _NUMBER, "relative_error": _NUMBER,
    },
    "required": ["snr_db", "trials", "empirical_mse", "theoretical_mse",
                 "relative_error"],
}
