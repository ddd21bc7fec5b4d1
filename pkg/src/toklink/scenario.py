"""Monte Carlo experiment harness: random instances, budget and weight
sweeps, and delimited result emission.

Instances are sampled deterministically from (seed, trial) alone, so every
sweep value sees the same device draw and per-trial comparisons across sweep
values are meaningful. Records are sorted before emission and floats are
written with nine significant digits, making repeated runs byte-identical.
"""

import csv
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import ao
from .baselines import OracleGrid, era_allocation, oracle_solve, pbwf_allocation
from .errors import ConfigError
from .perf import AUDIO_PRESET, VISUAL_PRESET, PerfModel
from .system import (Allocation, DeviceState, SystemConfig, channel_gain,
                     check_allocation, total_cost)

__all__ = [
    "DevicePreset", "Scenario", "SweepRecord", "DEFAULT_PRESETS",
    "sample_instance", "run_sweep", "write_records_csv", "summarize_records",
]

SWEEP_PARAMETERS = ("bandwidth", "power", "lambda")
METHODS = ("proposed", "pbwf", "era", "oracle")
_FLOAT_FMT = "%.9g"


@dataclass(frozen=True)
class DevicePreset:
    """Per-device task model and caps used when sampling instances.

    max_bandwidth/max_power of None mean the device is capped only by the
    aggregate budget of the sampled config.
    """

    perf: PerfModel
    max_tokens: float
    max_bandwidth: float = None
    max_power: float = None

    def __post_init__(self):
        if not (math.isfinite(self.max_tokens) and self.max_tokens >= 0.0):
            raise ConfigError(f"DevicePreset.max_tokens must be >= 0, got {self.max_tokens!r}")


DEFAULT_PRESETS = (DevicePreset(perf=VISUAL_PRESET, max_tokens=128.0),
                   DevicePreset(perf=AUDIO_PRESET, max_tokens=64.0))


@dataclass(frozen=True)
class Scenario:
    """A full sweep experiment description."""

    num_devices: int = 2
    distance_range: tuple = (0.3, 0.5)
    seed: int = 0
    device_presets: tuple = DEFAULT_PRESETS
    sweep_parameter: str = "bandwidth"
    sweep_values: tuple = (1e6, 2e6, 3e6, 4e6, 5e6)
    trials: int = 100
    methods: tuple = ("proposed", "pbwf", "era")
    base: SystemConfig = field(default_factory=SystemConfig)
    fading: str = "none"
    oracle_grid: int = 16

    def __post_init__(self):
        if not (isinstance(self.num_devices, int) and self.num_devices >= 1):
            raise ConfigError(f"Scenario.num_devices must be an integer >= 1, got {self.num_devices!r}")
        lo, hi = self.distance_range
        if not (0.0 < lo <= hi):
            raise ConfigError(f"Scenario.distance_range must satisfy 0 < low <= high, got {self.distance_range!r}")
        if not (isinstance(self.trials, int) and self.trials >= 1):
            raise ConfigError(f"Scenario.trials must be an integer >= 1, got {self.trials!r}")
        if self.sweep_parameter not in SWEEP_PARAMETERS:
            raise ConfigError(f"Scenario.sweep_parameter must be one of {SWEEP_PARAMETERS}, got {self.sweep_parameter!r}")
        if not self.sweep_values:
            raise ConfigError("Scenario.sweep_values must be nonempty")
        if not self.methods:
            raise ConfigError("Scenario.methods must be nonempty")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"Scenario.methods entries must be in {METHODS}, got {m!r}")
        if not self.device_presets:
            raise ConfigError("Scenario.device_presets must be nonempty")
        if self.fading not in ("none", "exponential"):
            raise ConfigError(f"Scenario.fading must be 'none' or 'exponential', got {self.fading!r}")
        object.__setattr__(self, "device_presets", tuple(self.device_presets))
        object.__setattr__(self, "sweep_values", tuple(float(v) for v in self.sweep_values))
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "distance_range", (float(lo), float(hi)))


@dataclass(frozen=True)
class SweepRecord:
    """One solved (sweep value, trial, method) cell."""

    sweep_param: str
    sweep_value: float
    trial: int
    method: str
    total_cost: float
    latency_term: float
    perf_term: float
    allocation: Allocation


def _config_at(scenario, sweep_value):
    cfg = scenario.base
    if sweep_value is None:
        return cfg
    if scenario.sweep_parameter == "bandwidth":
        return replace(cfg, total_bandwidth=sweep_value)
    if scenario.sweep_parameter == "power":
        return replace(cfg, total_power=sweep_value)
    return replace(cfg, lambda_weight=sweep_value)


def sample_instance(scenario, trial_index, sweep_value=None):
    """Draw the (devices, cfg) instance for one trial.

    The random draw depends only on (scenario.seed, trial_index); the sweep
    value affects budgets or lambda but never the sampled channel, so a trial
    is directly comparable across sweep values.
    """
    cfg = _config_at(scenario, sweep_value)
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=scenario.seed, spawn_key=(trial_index,)))
    k = scenario.num_devices
    lo, hi = scenario.distance_range
    distances = rng.uniform(lo, hi, size=k)
    fadings = rng.exponential(1.0, size=k) if scenario.fading == "exponential" else np.ones(k)
    devices = []
    for i in range(k):
        preset = scenario.device_presets[i % len(scenario.device_presets)]
        devices.append(DeviceState(
            id=i + 1,
            distance=float(distances[i]),
            channel_gain=channel_gain(float(distances[i]), float(fadings[i])),
            max_bandwidth=preset.max_bandwidth if preset.max_bandwidth is not None else cfg.total_bandwidth,
            max_power=preset.max_power if preset.max_power is not None else cfg.total_power,
            max_tokens=preset.max_tokens,
            perf=preset.perf))
    return devices, cfg


def _solve_method(method, devices, cfg, grid):
    if method == "proposed":
        return ao.solve_multistart(devices, cfg).final
    if method == "era":
        return era_allocation(devices, cfg)
    if method == "pbwf":
        return pbwf_allocation(devices, cfg)
    return oracle_solve(devices, cfg, grid)


def run_sweep(scenario):
    """Solve every (sweep value, trial, method) cell and return the records
    sorted by (sweep value, trial, canonical method order).

    Every record's allocation is checked against the budget and cap
    constraints before emission. Requesting the oracle with more than three
    devices propagates its size refusal.
    """
    grid = OracleGrid(scenario.oracle_grid, scenario.oracle_grid)
    records = []
    for sweep_value in scenario.sweep_values:
        for trial in range(scenario.trials):
            devices, cfg = sample_instance(scenario, trial, sweep_value)
            for method in scenario.methods:
                alloc = _solve_method(method, devices, cfg, grid)
                check_allocation(alloc, devices, cfg)
                cost = total_cost(alloc, devices, cfg)
                records.append(SweepRecord(
                    sweep_param=scenario.sweep_parameter,
                    sweep_value=float(sweep_value),
                    trial=trial,
                    method=method,
                    total_cost=cost.total,
                    latency_term=cost.latency_term,
                    perf_term=cost.perf_term,
                    allocation=alloc))
    rank = {m: i for i, m in enumerate(METHODS)}
    records.sort(key=lambda r: (r.sweep_value, r.trial, rank[r.method]))
    return records


def _csv_header(num_devices):
    cols = ["sweep_param", "sweep_value", "trial", "method",
            "total_cost", "latency_term", "perf_term", "T"]
    cols += [f"B_{i + 1}" for i in range(num_devices)]
    cols += [f"p_{i + 1}" for i in range(num_devices)]
    cols += [f"s_{i + 1}" for i in range(num_devices)]
    return cols


def write_records_csv(records, stream_or_path, num_devices):
    """Write records with the canonical header; floats use nine significant
    digits so identical records serialize identically."""
    if isinstance(stream_or_path, (str, bytes)) or hasattr(stream_or_path, "__fspath__"):
        with open(stream_or_path, "w", newline="") as fh:
            _write_csv(records, fh, num_devices)
    else:
        _write_csv(records, stream_or_path, num_devices)


def _write_csv(records, fh, num_devices):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(_csv_header(num_devices))
    for rec in records:
        alloc = rec.allocation
        row = [rec.sweep_param,
               _FLOAT_FMT % rec.sweep_value,
               str(rec.trial),
               rec.method,
               _FLOAT_FMT % rec.total_cost,
               _FLOAT_FMT % rec.latency_term,
               _FLOAT_FMT % rec.perf_term,
               _FLOAT_FMT % alloc.aux_latency]
        row += [_FLOAT_FMT % v for v in alloc.bandwidth]
        row += [_FLOAT_FMT % v for v in alloc.power]
        row += [_FLOAT_FMT % v for v in alloc.tokens]
        writer.writerow(row)


def records_csv_text(records, num_devices):
    buf = io.StringIO()
    _write_csv(records, buf, num_devices)
    return buf.getvalue()


def summarize_records(records, scenario):
    """Per-sweep-point mean and population standard deviation of the cost
    terms, grouped by method."""
    points = {}
    for rec in records:
        per_method = points.setdefault(rec.sweep_value, {})
        per_method.setdefault(rec.method, []).append(rec)

    def stats(values):
        arr = np.asarray(values)
        return {"mean": float(arr.mean()), "std": float(arr.std(ddof=0))}

    out_points = []
    for value in sorted(points):
        methods = {}
        for method in sorted(points[value]):
            recs = points[value][method]
            methods[method] = {
                "records": len(recs),
                "total_cost": stats([r.total_cost for r in recs]),
                "latency_term": stats([r.latency_term for r in recs]),
                "perf_term": stats([r.perf_term for r in recs]),
            }
        out_points.append({"sweep_value": value, "methods": methods})
    return {
        "sweep_parameter": scenario.sweep_parameter,
        "num_devices": scenario.num_devices,
        "trials": scenario.trials,
        "seed": scenario.seed,
        "methods": list(scenario.methods),
        "text_channel": {"bandwidth_hz": scenario.base.text_bandwidth,
                         "power_w": scenario.base.text_power},
        "points": out_points,
    }
