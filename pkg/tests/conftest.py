"""Shared instance generators for the test suite."""

import numpy as np

from toklink import AUDIO_PRESET, VISUAL_PRESET, DeviceState, PerfModel, SystemConfig

PRESETS = (VISUAL_PRESET, AUDIO_PRESET)
PRESET_TOKENS = (128.0, 64.0)


def random_perf(rng):
    """A performance model in the identifiable parameter range."""
    return PerfModel(alpha=float(rng.uniform(20.0, 200.0)),
                     beta=float(rng.uniform(0.2, 2.5)),
                     gamma=float(rng.uniform(0.05, 1.0)))


def random_devices(rng, k, cfg, distance_range=(0.3, 0.5), presets=True):
    """Sample k devices: distances in ``distance_range``, caps equal to the
    aggregate budgets, perf from the demo presets or random triples."""
    devices = []
    for i in range(k):
        d = float(rng.uniform(*distance_range))
        if presets:
            perf = PRESETS[i % 2]
            tokens = PRESET_TOKENS[i % 2]
        else:
            perf = random_perf(rng)
            tokens = float(rng.uniform(32.0, 256.0))
        devices.append(DeviceState.at_distance(
            id=i + 1, distance_km=d, perf=perf, max_tokens=tokens,
            max_bandwidth=cfg.total_bandwidth, max_power=cfg.total_power))
    return devices


def demo_config(**overrides):
    return SystemConfig(**overrides)


def grid_token_cost(devices, rates, cfg, s_grids):
    """Dense grid evaluation of the fixed-rate objective; returns the best
    cost over the mesh of per-device token grids (independent oracle for the
    token-length subproblem)."""
    from itertools import product

    lam = cfg.lambda_weight
    q = cfg.bits_per_token
    best = np.inf
    for combo in product(*s_grids):
        t = max(s * q / r for s, r in zip(combo, rates))
        perf = sum((dev.perf.alpha / s) ** dev.perf.beta + dev.perf.gamma
                   for dev, s in zip(devices, combo))
        cost = (1.0 - lam) * t + lam * perf
        if cost < best:
            best = cost
    return best
