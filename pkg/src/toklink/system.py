"""Physical-layer arithmetic shared by every solver and simulator path.

All solver-facing quantities are SI: Hz, W, W/Hz, seconds, bits. dB and dBm
appear only at the configuration boundary. Channel gains are power gains; the
link simulator uses the amplitude gain sqrt(g).
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .perf import PerfModel, phi_extended

__all__ = [
    "SystemConfig", "DeviceState", "Allocation", "CostBreakdown",
    "dbm_to_watt", "watt_to_dbm", "path_loss_db", "channel_gain",
    "rate", "latency", "total_cost", "check_allocation",
    "replace_config",
]


def dbm_to_watt(dbm):
    """Convert a dBm level to watts."""
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(watt):
    """Convert watts to dBm. Requires watt > 0."""
    if watt <= 0.0:
        raise ValueError(f"watt_to_dbm requires watt > 0, got {watt}")
    return 10.0 * math.log10(watt) + 30.0


def path_loss_db(distance_km):
    """Urban macro path loss 128.1 + 37.6*log10(d) for d in km."""
    if distance_km <= 0.0:
        raise ValueError(f"distance must be > 0 km, got {distance_km}")
    return 128.1 + 37.6 * math.log10(distance_km)


def channel_gain(distance_km, fading=None):
    """Linear channel power gain from path loss, optionally scaled by a
    linear fading factor."""
    gain = 10.0 ** (-path_loss_db(distance_km) / 10.0)
    if fading is not None:
        if fading <= 0.0:
            raise ValueError(f"fading factor must be > 0, got {fading}")
        gain *= fading
    return gain


def rate(bandwidth, power, gain, noise_psd):
    """Achievable rate B*log2(1 + g*p/(N0*B)) in bit/s.

    Zero bandwidth or zero power gives zero rate.
    """
    if bandwidth < 0.0 or power < 0.0:
        raise ValueError("bandwidth and power must be >= 0")
    if bandwidth == 0.0 or power == 0.0:
        return 0.0
    snr = gain * power / (noise_psd * bandwidth)
    return bandwidth * math.log2(1.0 + snr)


def latency(tokens, bits_per_token, rate_bps):
    """Transmission latency s*q/R in seconds.

    Zero tokens take zero time regardless of rate; a positive token load on a
    zero-rate link never completes (+inf).
    """
    if tokens < 0.0:
        raise ValueError(f"tokens must be >= 0, got {tokens}")
    if tokens == 0.0:
        return 0.0
    if rate_bps <= 0.0:
        return math.inf
    return tokens * bits_per_token / rate_bps


@dataclass(frozen=True)
class SystemConfig:
    """Shared network-level constants and solver knobs.

    Defaults describe the demo setup: 3 MHz / 23 dBm budgets, -174 dBm/Hz
    noise density, 24576 bits per token, and a fixed text side channel that
    is excluded from the optimized budgets.
    """

    total_bandwidth: float = 3e6
    total_power: float = dbm_to_watt(23.0)
    noise_psd: float = dbm_to_watt(-174.0)
    lambda_weight: float = 0.6
    bits_per_token: float = 24576.0
    text_bandwidth: float = 5e5
    text_power: float = dbm_to_watt(15.0)
    tolerance: float = 1e-6
    max_ao_iters: int = 50

    def __post_init__(self):
        for name in ("total_bandwidth", "total_power", "noise_psd",
                     "bits_per_token", "tolerance"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0.0):
                raise ConfigError(f"SystemConfig.{name} must be a positive finite number, got {value!r}")
        for name in ("text_bandwidth", "text_power"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0.0):
                raise ConfigError(f"SystemConfig.{name} must be a nonnegative finite number, got {value!r}")
        lam = self.lambda_weight
        if not (isinstance(lam, (int, float)) and 0.0 <= lam <= 1.0):
            raise ConfigError(f"SystemConfig.lambda_weight must lie in [0, 1], got {lam!r}")
        if not (isinstance(self.max_ao_iters, int) and self.max_ao_iters >= 1):
            raise ConfigError(f"SystemConfig.max_ao_iters must be an integer >= 1, got {self.max_ao_iters!r}")


def replace_config(cfg, **changes):
    """Return a copy of ``cfg`` with fields replaced (revalidates)."""
    return replace(cfg, **changes)


@dataclass(frozen=True)
class DeviceState:
    """One device's channel and task parameters.

    ``max_tokens`` may be zero (the device is then excluded from token
    allocation); bandwidth and power caps must be positive.
    """

    id: int
    distance: float
    channel_gain: float
    max_bandwidth: float
    max_power: float
    max_tokens: float
    perf: PerfModel

    def __post_init__(self):
        if not (math.isfinite(self.channel_gain) and self.channel_gain > 0.0):
            raise ConfigError(f"DeviceState.channel_gain must be > 0, got {self.channel_gain!r} (device {self.id})")
        for name in ("max_bandwidth", "max_power"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ConfigError(f"DeviceState.{name} must be > 0, got {value!r} (device {self.id})")
        if not (math.isfinite(self.max_tokens) and self.max_tokens >= 0.0):
            raise ConfigError(f"DeviceState.max_tokens must be >= 0, got {self.max_tokens!r} (device {self.id})")

    @classmethod
    def at_distance(cls, id, distance_km, perf, max_tokens,
                    max_bandwidth, max_power, fading=None):
        """Build a device whose gain follows the path-loss model at
        ``distance_km`` (times an optional linear fading factor)."""
        return cls(id=id, distance=distance_km,
                   channel_gain=channel_gain(distance_km, fading),
                   max_bandwidth=max_bandwidth, max_power=max_power,
                   max_tokens=max_tokens, perf=perf)


@dataclass(frozen=True)
class Allocation:
    """A full resource decision: per-device bandwidth (Hz), power (W),
    token length, and the auxiliary shared latency bound (s)."""

    bandwidth: np.ndarray
    power: np.ndarray
    tokens: np.ndarray
    aux_latency: float = 0.0

    def __post_init__(self):
        for name in ("bandwidth", "power", "tokens"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = len(self.bandwidth)
        if len(self.power) != n or len(self.tokens) != n:
            raise ValueError("bandwidth, power, tokens must have equal length")

    def as_dict(self):
        return {
            "bandwidth_hz": [float(v) for v in self.bandwidth],
            "power_w": [float(v) for v in self.power],
            "tokens": [float(v) for v in self.tokens],
            "aux_latency_s": float(self.aux_latency),
        }


@dataclass(frozen=True)
class CostBreakdown:
    """Objective decomposition for an allocation."""

    latency_term: float
    perf_term: float
    total: float
    per_device_latency: np.ndarray


def _weighted(weight, term):
    # 0 * inf must contribute nothing at the lambda endpoints
    if weight == 0.0:
        return 0.0
    return weight * term


def total_cost(alloc, devices, cfg):
    """Evaluate (1-lambda)*max-latency + lambda*sum phi(s) for ``alloc``."""
    if len(devices) != len(alloc.bandwidth):
        raise ValueError("allocation and device list length mismatch")
    lam = cfg.lambda_weight
    lat = np.zeros(len(devices))
    perf_sum = 0.0
    for i, dev in enumerate(devices):
        r = rate(alloc.bandwidth[i], alloc.power[i], dev.channel_gain, cfg.noise_psd)
        lat[i] = latency(alloc.tokens[i], cfg.bits_per_token, r)
        perf_sum += phi_extended(dev.perf, alloc.tokens[i])
    latency_term = float(np.max(lat)) if len(devices) else 0.0
    total = _weighted(1.0 - lam, latency_term) + _weighted(lam, perf_sum)
    return CostBreakdown(latency_term=latency_term, perf_term=perf_sum,
                         total=total, per_device_latency=lat)


def check_allocation(alloc, devices, cfg, rel_tol=1e-9):
    """Raise ValueError naming the violated constraint if ``alloc`` is
    outside the feasible set (budgets, caps, nonnegativity)."""
    bw, pw, tok = alloc.bandwidth, alloc.power, alloc.tokens
    if np.any(bw < 0.0):
        raise ValueError("negative bandwidth entry")
    if np.any(pw < 0.0):
        raise ValueError("negative power entry")
    if np.any(tok < 0.0):
        raise ValueError("negative token entry")
    if float(np.sum(bw)) > cfg.total_bandwidth * (1.0 + rel_tol):
        raise ValueError(f"bandwidth budget exceeded: {float(np.sum(bw))} > {cfg.total_bandwidth}")
    if float(np.sum(pw)) > cfg.total_power * (1.0 + rel_tol):
        raise ValueError(f"power budget exceeded: {float(np.sum(pw))} > {cfg.total_power}")
    for i, dev in enumerate(devices):
        if bw[i] > dev.max_bandwidth * (1.0 + rel_tol):
            raise ValueError(f"device {dev.id} bandwidth cap exceeded")
        if pw[i] > dev.max_power * (1.0 + rel_tol):
            raise ValueError(f"device {dev.id} power cap exceeded")
        if tok[i] > dev.max_tokens * (1.0 + rel_tol) + 1e-12:
            raise ValueError(f"device {dev.id} token cap exceeded")
