import numpy as np
import pytest

from toklink import (ConfigError, OracleSizeError, Scenario, SystemConfig,
                     check_allocation, dbm_to_watt, run_sweep,
                     sample_instance, summarize_records, write_records_csv)
from toklink.scenario import records_csv_text


def _small_scenario(**overrides):
    base = dict(num_devices=2, seed=3, trials=4,
                sweep_parameter="bandwidth", sweep_values=(1e6, 3e6),
                methods=("proposed", "pbwf", "era"))
    base.update(overrides)
    return Scenario(**base)


def test_default_instance_matches_demo_parameters():
    scenario = Scenario(seed=0)
    devices, cfg = sample_instance(scenario, 0)
    assert cfg.total_bandwidth == 3e6
    assert abs(cfg.total_power - dbm_to_watt(23.0)) < 1e-18
    assert abs(cfg.noise_psd - dbm_to_watt(-174.0)) < 1e-30
    assert cfg.lambda_weight == 0.6
    assert [d.max_tokens for d in devices] == [128.0, 64.0]
    assert all(0.3 <= d.distance <= 0.5 for d in devices)


def test_sample_instance_deterministic():
    scenario = _small_scenario()
    a, _ = sample_instance(scenario, 2, 1e6)
    b, _ = sample_instance(scenario, 2, 1e6)
    assert [d.channel_gain for d in a] == [d.channel_gain for d in b]


def test_sample_instance_independent_of_sweep_value():
    scenario = _small_scenario()
    a, cfg_a = sample_instance(scenario, 1, 1e6)
    b, cfg_b = sample_instance(scenario, 1, 3e6)
    assert [d.channel_gain for d in a] == [d.channel_gain for d in b]
    assert cfg_a.total_bandwidth == 1e6
    assert cfg_b.total_bandwidth == 3e6


def test_distances_always_within_range():
    scenario = Scenario(seed=9, num_devices=3, distance_range=(0.3, 0.5))
    for trial in range(200):
        devices, _ = sample_instance(scenario, trial)
        for d in devices:
            assert 0.3 <= d.distance <= 0.5


def test_sweep_parameter_application():
    lam = _small_scenario(sweep_parameter="lambda", sweep_values=(0.1, 0.9))
    _, cfg = sample_instance(lam, 0, 0.9)
    assert cfg.lambda_weight == 0.9
    pow_s = _small_scenario(sweep_parameter="power", sweep_values=(0.05,))
    _, cfg = sample_instance(pow_s, 0, 0.05)
    assert cfg.total_power == 0.05


def test_run_sweep_records_sorted_and_feasible():
    scenario = _small_scenario(trials=3)
    records = run_sweep(scenario)
    assert len(records) == 2 * 3 * 3
    keys = [(r.sweep_value, r.trial, r.method) for r in records]
    assert keys == sorted(keys, key=lambda k: (k[0], k[1],
                                               ("proposed", "pbwf", "era", "oracle").index(k[2])))
    for rec in records:
        devices, cfg = sample_instance(scenario, rec.trial, rec.sweep_value)
        check_allocation(rec.allocation, devices, cfg)


def test_run_sweep_per_trial_dominance_exact():
    scenario = _small_scenario(trials=4)
    records = run_sweep(scenario)
    by_key = {(r.sweep_value, r.trial, r.method): r.total_cost for r in records}
    for value in scenario.sweep_values:
        for trial in range(scenario.trials):
            prop = by_key[(value, trial, "proposed")]
            assert prop <= by_key[(value, trial, "era")]
            assert prop <= by_key[(value, trial, "pbwf")]


def test_run_sweep_oracle_refused_for_many_devices():
    scenario = _small_scenario(num_devices=4, trials=1,
                               methods=("oracle",), sweep_values=(3e6,))
    with pytest.raises(OracleSizeError):
        run_sweep(scenario)


def test_csv_deterministic_and_matches_file_output(tmp_path):
    scenario = _small_scenario(trials=2)
    records = run_sweep(scenario)
    text_a = records_csv_text(records, scenario.num_devices)
    text_b = records_csv_text(run_sweep(scenario), scenario.num_devices)
    assert text_a == text_b
    out = tmp_path / "sweep.csv"
    write_records_csv(records, out, scenario.num_devices)
    assert out.read_text() == text_a


def test_csv_header_layout():
    scenario = _small_scenario(trials=1, sweep_values=(3e6,))
    records = run_sweep(scenario)
    header = records_csv_text(records, 2).splitlines()[0]
    assert header == ("sweep_param,sweep_value,trial,method,total_cost,"
                      "latency_term,perf_term,T,B_1,B_2,p_1,p_2,s_1,s_2")


def test_summary_structure_and_stats():
    scenario = _small_scenario(trials=3)
    records = run_sweep(scenario)
    summary = summarize_records(records, scenario)
    assert summary["sweep_parameter"] == "bandwidth"
    assert summary["trials"] == 3
    assert summary["text_channel"]["bandwidth_hz"] == 5e5
    assert len(summary["points"]) == 2
    point = summary["points"][0]
    assert point["sweep_value"] == 1e6
    stats = point["methods"]["proposed"]["total_cost"]
    values = [r.total_cost for r in records
              if r.sweep_value == 1e6 and r.method == "proposed"]
    assert abs(stats["mean"] - np.mean(values)) < 1e-12
    assert abs(stats["std"] - np.std(values)) < 1e-12


def test_scenario_validation():
    with pytest.raises(ConfigError, match="trials"):
        _small_scenario(trials=0)
    with pytest.raises(ConfigError, match="distance_range"):
        _small_scenario(distance_range=(0.5, 0.3))
    with pytest.raises(ConfigError, match="sweep_parameter"):
        _small_scenario(sweep_parameter="noise")
    with pytest.raises(ConfigError, match="methods"):
        _small_scenario(methods=("gradient",))


def test_exponential_fading_changes_gains():
    plain = Scenario(seed=5, fading="none")
    faded = Scenario(seed=5, fading="exponential")
    a, _ = sample_instance(plain, 0)
    b, _ = sample_instance(faded, 0)
    assert a[0].channel_gain != b[0].channel_gain
