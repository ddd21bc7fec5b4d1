import csv
import io
import json

import jsonschema
import pytest

from toklink import InfeasibleProblemError
from toklink.cli import (EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK,
                         EXIT_ORACLE_SIZE, main)
from toklink.configio import (ALLOCATION_OUTPUT_SCHEMA, FIT_OUTPUT_SCHEMA,
                              LINK_OUTPUT_SCHEMA)

CONFIG = "configs/demo.json"


def _write_json(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def _scenario_path(tmp_path, **overrides):
    doc = {
        "seed": 11,
        "num_devices": 2,
        "trials": 2,
        "sweep": {"parameter": "bandwidth", "values": [2e6, 4e6]},
        "methods": ["proposed", "era"],
    }
    doc.update(overrides)
    return _write_json(tmp_path / "scenario.json", doc)


def test_solve_stdout_matches_schema(capsys):
    assert main(["solve", "--config", CONFIG]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    jsonschema.validate(payload, ALLOCATION_OUTPUT_SCHEMA)
    assert payload["method"] == "proposed"
    assert payload["converged"] is True
    assert len(payload["allocation"]["bandwidth_hz"]) == 2
    assert payload["cost"]["total"] > 0


def test_solve_baseline_methods(capsys):
    assert main(["solve", "--config", CONFIG, "--method", "era"]) == EXIT_OK
    era = json.loads(capsys.readouterr().out)
    assert era["method"] == "era"
    assert era["converged"] is None
    bw = era["allocation"]["bandwidth_hz"]
    assert bw[0] == bw[1]
    assert main(["solve", "--config", CONFIG, "--method", "pbwf"]) == EXIT_OK
    pbwf = json.loads(capsys.readouterr().out)
    assert pbwf["allocation"]["bandwidth_hz"][0] > pbwf["allocation"]["bandwidth_hz"][1]


def test_solve_out_file(tmp_path, capsys):
    out = tmp_path / "alloc.json"
    assert main(["solve", "--config", CONFIG, "--out", str(out)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    payload = json.loads(out.read_text())
    jsonschema.validate(payload, ALLOCATION_OUTPUT_SCHEMA)


def test_missing_config_exits_2(capsys):
    assert main(["solve", "--config", "/nonexistent/cfg.json"]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "config error:" in err and "/nonexistent/cfg.json" in err


def test_invalid_json_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert main(["solve", "--config", str(bad)]) == EXIT_CONFIG
    assert "invalid JSON" in capsys.readouterr().err


def test_bad_field_exits_2(tmp_path, capsys):
    path = _write_json(tmp_path / "cfg.json", {"lambda_weight": 2.0, "devices": [
        {"distance_km": 0.4, "s_max": 64,
         "perf": {"alpha": 64, "beta": 0.7, "gamma": 0.45}}]})
    assert main(["solve", "--config", path]) == EXIT_CONFIG
    assert "lambda_weight" in capsys.readouterr().err


def test_infeasible_exits_3(monkeypatch, capsys):
    import toklink.cli as cli_mod

    def boom(devices, cfg):
        raise InfeasibleProblemError("device 1 has zero rate but a positive token cap")

    monkeypatch.setattr(cli_mod.ao, "solve_multistart", boom)
    assert main(["solve", "--config", CONFIG]) == EXIT_INFEASIBLE
    assert "infeasible problem:" in capsys.readouterr().err


def test_oracle_stdout_and_size_refusal(tmp_path, capsys):
    assert main(["oracle", "--config", CONFIG, "--grid", "8"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    jsonschema.validate(payload, ALLOCATION_OUTPUT_SCHEMA)
    assert payload["method"] == "oracle"
    assert payload["grid"] == {"bandwidth_points": 8, "power_points": 8}

    four = json.loads(open(CONFIG).read())
    four["devices"] = [
        {"id": i + 1, "distance_km": 0.4, "s_max": 32,
         "perf": {"alpha": 32, "beta": 0.8, "gamma": 0.4}}
        for i in range(4)
    ]
    path = _write_json(tmp_path / "four.json", four)
    assert main(["oracle", "--config", path, "--grid", "8"]) == EXIT_ORACLE_SIZE
    assert "oracle size refusal:" in capsys.readouterr().err


def test_oracle_grid_too_coarse_exits_2(capsys):
    assert main(["oracle", "--config", CONFIG, "--grid", "4"]) == EXIT_CONFIG
    assert "config error:" in capsys.readouterr().err


def test_link_output_matches_schema(capsys):
    assert main(["link", "--snr-db", "100", "--trials", "200",
                 "--rows", "8", "--cols", "16", "--seed", "3"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    jsonschema.validate(payload, LINK_OUTPUT_SCHEMA)
    assert payload["trials"] == 200
    assert payload["relative_error"] < 0.05


def test_link_rejects_nonpositive_counts(capsys):
    assert main(["link", "--snr-db", "0", "--trials", "0"]) == EXIT_CONFIG
    assert "--trials" in capsys.readouterr().err


def test_fit_recovers_model(tmp_path, capsys):
    lengths = [4, 8, 16, 32, 64, 128]
    losses = [(96.0 / s) ** 1.3 + 0.4 for s in lengths]
    path = _write_json(tmp_path / "fit.json",
                       {"token_lengths": lengths, "losses": losses})
    assert main(["fit", "--data", path]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    jsonschema.validate(payload, FIT_OUTPUT_SCHEMA)
    assert abs(payload["alpha"] - 96.0) < 1e-3
    assert abs(payload["beta"] - 1.3) < 1e-5
    assert payload["degenerate"] is False


def test_fit_from_csv(tmp_path, capsys):
    lengths = [8, 16, 32, 64, 128]
    rows = ["tokens,loss"] + [f"{s},{(50.0 / s) ** 0.8 + 0.3!r}" for s in lengths]
    path = tmp_path / "fit.csv"
    path.write_text("\n".join(rows) + "\n")
    assert main(["fit", "--data", str(path)]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert abs(payload["alpha"] - 50.0) < 1e-3
    assert abs(payload["beta"] - 0.8) < 1e-5
    assert abs(payload["gamma"] - 0.3) < 1e-6


def test_fit_degenerate_flat_losses(tmp_path, capsys):
    path = _write_json(tmp_path / "flat.json",
                       {"token_lengths": [8, 16, 32], "losses": [1.2, 1.2, 1.2]})
    assert main(["fit", "--data", path]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["degenerate"] is True
    assert payload["gamma"] == 1.2


def test_sweep_stdout_csv(tmp_path, capsys):
    scenario = _scenario_path(tmp_path)
    assert main(["sweep", "--scenario", scenario]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 2 * 2 * 2
    assert set(r["method"] for r in rows) == {"proposed", "era"}
    for row in rows:
        assert float(row["total_cost"]) > 0


def test_sweep_outputs_and_figures(tmp_path, capsys):
    scenario = _scenario_path(tmp_path)
    out = tmp_path / "sweep.csv"
    plots = tmp_path / "figs"
    assert main(["sweep", "--scenario", scenario, "--out", str(out),
                 "--plot-dir", str(plots)]) == EXIT_OK
    assert out.exists()
    summary = json.loads((tmp_path / "sweep.summary.json").read_text())
    assert summary["sweep_parameter"] == "bandwidth"
    pngs = sorted(p.name for p in plots.glob("*.png"))
    assert pngs == ["cost_vs_bandwidth.png", "terms_vs_bandwidth.png"]
    assert "figure file(s)" in capsys.readouterr().err


def test_sweep_plot_dir_requires_out(tmp_path, capsys):
    scenario = _scenario_path(tmp_path)
    assert main(["sweep", "--scenario", scenario,
                 "--plot-dir", str(tmp_path / "figs")]) == EXIT_CONFIG
    assert "--plot-dir requires --out" in capsys.readouterr().err


def test_sweep_byte_identical_across_runs(tmp_path):
    scenario = _scenario_path(tmp_path)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--scenario", scenario, "--out", str(a)]) == EXIT_OK
    assert main(["sweep", "--scenario", scenario, "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_report_from_existing_csv(tmp_path, capsys):
    scenario = _scenario_path(tmp_path)
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--scenario", scenario, "--out", str(out)]) == EXIT_OK
    capsys.readouterr()
    figdir = tmp_path / "report"
    assert main(["report", "--csv", str(out), "--outdir", str(figdir),
                 "--formats", "png,svg"]) == EXIT_OK
    names = sorted(p.name for p in figdir.iterdir())
    assert names == ["cost_vs_bandwidth.png", "cost_vs_bandwidth.svg",
                     "terms_vs_bandwidth.png", "terms_vs_bandwidth.svg"]


def test_report_missing_csv_exits_2(tmp_path, capsys):
    assert main(["report", "--csv", str(tmp_path / "none.csv"),
                 "--outdir", str(tmp_path)]) == EXIT_CONFIG
    assert "sweep CSV not found" in capsys.readouterr().err
