import math

import numpy as np
import pytest

from toklink import (Allocation, ConfigError, DeviceState, PerfModel,
                     SystemConfig, channel_gain, check_allocation,
                     dbm_to_watt, latency, path_loss_db, rate, total_cost,
                     watt_to_dbm)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def test_dbm_to_watt_frozen_values():
    assert rel(dbm_to_watt(23.0), 0.19952623149688797) < 1e-14
    assert rel(dbm_to_watt(-174.0), 3.981071705534986e-21) < 1e-14
    assert rel(dbm_to_watt(15.0), 0.03162277660168379) < 1e-14
    assert dbm_to_watt(30.0) == 1.0


def test_watt_to_dbm_round_trip():
    for dbm in (-174.0, -30.0, 0.0, 15.0, 23.0):
        assert rel(watt_to_dbm(dbm_to_watt(dbm)), dbm) < 1e-12 or abs(watt_to_dbm(dbm_to_watt(dbm)) - dbm) < 1e-10


def test_watt_to_dbm_rejects_nonpositive():
    with pytest.raises(ValueError):
        watt_to_dbm(0.0)
    with pytest.raises(ValueError):
        watt_to_dbm(-1.0)


def test_path_loss_frozen_values():
    assert rel(path_loss_db(1.0), 128.1) < 1e-14
    assert rel(path_loss_db(0.3), 108.4397591774593) < 1e-14
    assert rel(path_loss_db(0.5), 116.7812721630343) < 1e-14


def test_path_loss_rejects_nonpositive_distance():
    with pytest.raises(ValueError):
        path_loss_db(0.0)


def test_channel_gain_frozen_values():
    assert rel(channel_gain(0.3), 1.432267318355735e-11) < 1e-12
    assert rel(channel_gain(0.5), 2.098325138837318e-12) < 1e-12
    assert rel(channel_gain(1.0), 1.5488166189124858e-13) < 1e-12


def test_channel_gain_fading_scales_linearly():
    assert rel(channel_gain(0.4, 2.0), 2.0 * channel_gain(0.4)) < 1e-14
    with pytest.raises(ValueError):
        channel_gain(0.4, 0.0)


def test_rate_frozen_value():
    n0 = 3.981071705534986e-21
    r = rate(1e6, 0.1, 1e-11, n0)
    assert rel(r, 7978359.497801243) < 1e-12
    snr = 1e-11 * 0.1 / (n0 * 1e6)
    assert rel(snr, 251.18864315095715) < 1e-12


def test_rate_zero_edges():
    n0 = 3.981071705534986e-21
    assert rate(0.0, 0.1, 1e-11, n0) == 0.0
    assert rate(1e6, 0.0, 1e-11, n0) == 0.0
    with pytest.raises(ValueError):
        rate(-1.0, 0.1, 1e-11, n0)


def test_rate_monotone_in_bandwidth_and_power():
    n0 = 3.981071705534986e-21
    rng = np.random.default_rng(5)
    for _ in range(50):
        b = float(rng.uniform(1e5, 5e6))
        p = float(rng.uniform(1e-3, 0.2))
        g = float(rng.uniform(1e-13, 1e-10))
        assert rate(b * 1.1, p, g, n0) > rate(b, p, g, n0)
        assert rate(b, p * 1.1, g, n0) > rate(b, p, g, n0)


def test_latency_values_and_edges():
    assert rel(latency(128.0, 24576.0, 7978359.497801243), 0.3942825590733197) < 1e-12
    assert latency(0.0, 24576.0, 0.0) == 0.0
    assert latency(10.0, 24576.0, 0.0) == math.inf
    with pytest.raises(ValueError):
        latency(-1.0, 24576.0, 1.0)


def test_system_config_defaults_match_demo_setup():
    cfg = SystemConfig()
    assert cfg.total_bandwidth == 3e6
    assert rel(cfg.total_power, 0.19952623149688797) < 1e-14
    assert rel(cfg.noise_psd, 3.981071705534986e-21) < 1e-14
    assert cfg.lambda_weight == 0.6
    assert cfg.bits_per_token == 24576.0
    assert cfg.text_bandwidth == 5e5
    assert rel(cfg.text_power, 0.03162277660168379) < 1e-14


def test_system_config_validation_names_field():
    with pytest.raises(ConfigError, match="total_bandwidth"):
        SystemConfig(total_bandwidth=0.0)
    with pytest.raises(ConfigError, match="lambda_weight"):
        SystemConfig(lambda_weight=1.5)
    with pytest.raises(ConfigError, match="max_ao_iters"):
        SystemConfig(max_ao_iters=0)


def test_device_state_validation():
    perf = PerfModel(alpha=64.0, beta=0.7, gamma=0.45)
    with pytest.raises(ConfigError, match="channel_gain"):
        DeviceState(id=1, distance=0.4, channel_gain=0.0, max_bandwidth=1e6,
                    max_power=0.1, max_tokens=64.0, perf=perf)
    with pytest.raises(ConfigError, match="max_bandwidth"):
        DeviceState(id=1, distance=0.4, channel_gain=1e-11, max_bandwidth=0.0,
                    max_power=0.1, max_tokens=64.0, perf=perf)
    with pytest.raises(ConfigError, match="max_tokens"):
        DeviceState(id=1, distance=0.4, channel_gain=1e-11, max_bandwidth=1e6,
                    max_power=0.1, max_tokens=-1.0, perf=perf)
    zero_tokens = DeviceState(id=1, distance=0.4, channel_gain=1e-11,
                              max_bandwidth=1e6, max_power=0.1,
                              max_tokens=0.0, perf=perf)
    assert zero_tokens.max_tokens == 0.0


def test_allocation_requires_matching_lengths():
    with pytest.raises(ValueError):
        Allocation(bandwidth=[1.0, 2.0], power=[1.0], tokens=[1.0, 2.0])


def _two_devices(cfg):
    return [DeviceState.at_distance(1, 0.35, PerfModel(128.0, 0.9, 0.35), 128.0,
                                    cfg.total_bandwidth, cfg.total_power),
            DeviceState.at_distance(2, 0.45, PerfModel(64.0, 0.7, 0.45), 64.0,
                                    cfg.total_bandwidth, cfg.total_power)]


def test_total_cost_identity():
    cfg = SystemConfig()
    devices = _two_devices(cfg)
    alloc = Allocation(bandwidth=[1.5e6, 1.5e6], power=[0.1, 0.09],
                       tokens=[100.0, 50.0])
    cost = total_cost(alloc, devices, cfg)
    lam = cfg.lambda_weight
    assert rel(cost.total, (1 - lam) * cost.latency_term + lam * cost.perf_term) < 1e-14
    lat = [latency(alloc.tokens[i],
                   cfg.bits_per_token,
                   rate(alloc.bandwidth[i], alloc.power[i],
                        devices[i].channel_gain, cfg.noise_psd))
           for i in range(2)]
    assert rel(cost.latency_term, max(lat)) < 1e-14


def test_total_cost_lambda_zero_ignores_infinite_phi():
    cfg = SystemConfig(lambda_weight=0.0)
    devices = _two_devices(cfg)
    alloc = Allocation(bandwidth=[1e6, 1e6], power=[0.1, 0.05],
                       tokens=[0.0, 0.0])
    cost = total_cost(alloc, devices, cfg)
    assert cost.total == 0.0
    assert math.isinf(cost.perf_term)


def test_total_cost_lambda_one_ignores_infinite_latency():
    cfg = SystemConfig(lambda_weight=1.0)
    devices = _two_devices(cfg)
    alloc = Allocation(bandwidth=[0.0, 1e6], power=[0.0, 0.05],
                       tokens=[128.0, 64.0])
    cost = total_cost(alloc, devices, cfg)
    assert math.isinf(cost.latency_term)
    assert math.isfinite(cost.total)
    assert rel(cost.total, cost.perf_term) < 1e-14


def test_check_allocation_flags_violations():
    cfg = SystemConfig()
    devices = _two_devices(cfg)
    good = Allocation(bandwidth=[1.5e6, 1.5e6], power=[0.09, 0.09],
                      tokens=[128.0, 64.0])
    check_allocation(good, devices, cfg)
    with pytest.raises(ValueError, match="bandwidth budget"):
        check_allocation(Allocation([2e6, 1.5e6], [0.09, 0.09], [1.0, 1.0]),
                         devices, cfg)
    with pytest.raises(ValueError, match="power budget"):
        check_allocation(Allocation([1e6, 1e6], [0.15, 0.15], [1.0, 1.0]),
                         devices, cfg)
    with pytest.raises(ValueError, match="token cap"):
        check_allocation(Allocation([1e6, 1e6], [0.09, 0.09], [129.0, 1.0]),
                         devices, cfg)
    with pytest.raises(ValueError, match="negative"):
        check_allocation(Allocation([-1.0, 1e6], [0.09, 0.09], [1.0, 1.0]),
                         devices, cfg)
